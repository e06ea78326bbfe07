"""Command-line orchestration of the pipeline.

Each subcommand fronts one module operation (or a documented composition),
reads/writes the file formats defined by the modules, writes artifacts
atomically, and drops a machine-readable run report next to its primary
output. Exit codes: 0 success, 1 usage error, 2 data error.

A JSON config file (--config) can supply defaults for any flag; explicit
flags win.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import warnings
from datetime import date
from pathlib import Path

import numpy as np

from . import __version__
from .annotation import (
    AnnotationError,
    LabelCoarse,
    LabelFine,
    aggregate_crowd,
    build_gold,
    collapse_label,
    compute_reliability,
    read_adjudications,
    read_annotations,
)
from .augment import AugmentError, LabeledDataset, Provenance, read_dataset, write_dataset
from .corpus import (
    Corpus,
    CorpusError,
    parse_corpus,
    parse_corpus_lenient,
    parse_timestamp,
    write_corpus,
    write_hashtag_report,
    expand_hashtags,
)
from .metrics import ConfusionMatrix, MetricsError, confusion, macro_f1, mean_pairwise_kappa, fleiss_kappa
from .model import (
    BaselineModel,
    ClassifierHandle,
    FeatureMode,
    ModelError,
    TrainConfig,
    train_baseline,
)
from .reports import RunReport, atomic_path, atomic_text
from .trends import (
    TrendsError,
    daily_counts,
    read_daily_csv,
    read_external_csv,
    sa_ratio,
    spearman,
    weekly_average,
    write_daily_csv,
    write_long_csv,
    write_ratio_csv,
)
from .weak_supervision import (
    AutoLabelConfig,
    ModelPool,
    PoolError,
    auto_label,
    ensemble_predict,
    write_autolabel_jsonl,
)

DATA_ERRORS = (
    AnnotationError,
    AugmentError,
    CorpusError,
    MetricsError,
    ModelError,
    PoolError,
    TrendsError,
    OSError,
    json.JSONDecodeError,
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags; the pipeline reserves 2 for data errors.
    def error(self, message):
        raise UsageError(message)


# --- labels CSV ---------------------------------------------------------------
#
# Aggregated-label file: header tweet_id,label_fine,label_coarse,provenance.
# label_fine may be empty for rows that only exist at coarse granularity.


def write_labels_csv(path, rows: list[dict]) -> None:
    with atomic_text(path, newline="") as f:
        w = csv.writer(f)
        w.writerow(["tweet_id", "label_fine", "label_coarse", "provenance"])
        for row in rows:
            fine = row.get("label_fine")
            w.writerow(
                [
                    row["tweet_id"],
                    "" if fine is None else int(fine),
                    row["label_coarse"].value,
                    row["provenance"].value,
                ]
            )


def read_labels_csv(path) -> list[dict]:
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        required = {"tweet_id", "label_coarse", "provenance"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise AnnotationError(f"labels file {path} must have columns {sorted(required)}")
        rows = []
        for row in reader:
            fine_raw = (row.get("label_fine") or "").strip()
            rows.append(
                {
                    "tweet_id": row["tweet_id"],
                    "label_fine": LabelFine(int(fine_raw)) if fine_raw else None,
                    "label_coarse": LabelCoarse(row["label_coarse"]),
                    "provenance": Provenance(row["provenance"]),
                }
            )
        return rows


def _read_pred_jsonl(path) -> dict[str, LabelCoarse]:
    out: dict[str, LabelCoarse] = {}
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            if not line.strip():
                continue
            obj = json.loads(line)
            out[obj["id"]] = LabelCoarse(obj["label"])
    return out


def _load_corpus(path) -> Corpus:
    with open(path, "r", encoding="utf-8") as f:
        return parse_corpus(f)


def _load_models(paths: list[str]) -> ModelPool:
    handles = []
    for i, path in enumerate(paths):
        model = BaselineModel.load(path)
        handles.append(
            ClassifierHandle(
                id=f"m{i}:{Path(path).name}",
                classifier=model,
                dev_score=model.metadata.get("dev_macro_f1"),
            )
        )
    return ModelPool.of(handles)


def _report_path(args, primary_output) -> Path:
    if getattr(args, "report", None):
        return Path(args.report)
    return Path(str(primary_output) + ".run.json")


def _apply_config(subparsers: dict[str, argparse.ArgumentParser], argv: list[str]) -> None:
    """Apply --config JSON values as subcommand defaults (explicit flags win).

    Config keys are flag names with dashes as underscores; a key is accepted
    if any subcommand knows it.
    """
    probe = _Parser(add_help=False)
    probe.add_argument("--config")
    known, _ = probe.parse_known_args(argv)
    if not known.config:
        return
    with open(known.config, "r", encoding="utf-8") as f:
        config = json.load(f)
    all_dests = {a.dest for p in subparsers.values() for a in p._actions}
    unknown = set(config) - all_dests - {"config"}
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    for p in subparsers.values():
        valid = {a.dest for a in p._actions}
        p.set_defaults(**{k: v for k, v in config.items() if k in valid})


# --- subcommands ----------------------------------------------------------------


def cmd_ingest(args) -> int:
    report = RunReport(command="ingest", params={"lenient": args.lenient})
    report.add_input(args.input)
    window = None
    if args.window_start or args.window_end:
        if not (args.window_start and args.window_end):
            raise UsageError("--window-start and --window-end must be given together")
        window = (parse_timestamp(args.window_start), parse_timestamp(args.window_end))
        report.params["window"] = [args.window_start, args.window_end]

    with open(args.input, "r", encoding="utf-8") as f:
        if args.lenient:
            corpus, parse_report = parse_corpus_lenient(f, window=window)
            report.counts["skipped"] = parse_report.n_skipped
            report.counts["skip_reasons"] = [f"line {n}: {msg}" for n, msg in parse_report.skipped[:20]]
        else:
            corpus = parse_corpus(f, window=window)

    with atomic_text(args.output) as out:
        write_corpus(corpus, out)
    report.counts["tweets"] = len(corpus)
    report.add_output(args.output)
    report.write(_report_path(args, args.output))
    print(f"ingested {len(corpus)} tweets -> {args.output}")
    return 0


def cmd_hashtags(args) -> int:
    report = RunReport(command="hashtags", params={"min_cooccurrence": args.min_cooccurrence})
    report.add_input(args.input)
    seeds = {s.strip() for s in args.seeds.split(",") if s.strip()}
    report.params["seeds"] = sorted(seeds)

    corpus = _load_corpus(args.input)
    ranked = expand_hashtags(corpus, seeds, min_cooccurrence=args.min_cooccurrence)
    with atomic_text(args.output, newline="") as out:
        write_hashtag_report(ranked, out)
    report.counts["candidates"] = len(ranked)
    report.add_output(args.output)
    report.write(_report_path(args, args.output))
    print(f"{len(ranked)} candidate hashtags -> {args.output}")
    return 0


def cmd_aggregate(args) -> int:
    report = RunReport(
        command="aggregate",
        params={"granularity": args.granularity},
        seeds={},
    )
    rows: list[dict] = []
    gold = None
    reliabilities: dict[str, float | None] = {}

    if args.expert_annotations:
        report.add_input(args.expert_annotations)
        expert = read_annotations(args.expert_annotations)
        adjudications = None
        if args.adjudications:
            report.add_input(args.adjudications)
            adjudications = read_adjudications(args.adjudications)
        gold = build_gold(expert, adjudications)
        for tweet_id in sorted(gold.labels):
            fine = gold.labels[tweet_id]
            rows.append(
                {
                    "tweet_id": tweet_id,
                    "label_fine": fine,
                    "label_coarse": collapse_label(fine),
                    "provenance": Provenance.EXPERT,
                }
            )
        report.counts["gold"] = len(gold.labels)
        report.counts["gold_excluded"] = len(gold.excluded)

    if args.crowd_annotations:
        report.add_input(args.crowd_annotations)
        crowd = read_annotations(args.crowd_annotations)
        if gold is not None:
            reliabilities = compute_reliability(crowd, gold, granularity=args.granularity)
        gold_ids = set(gold.labels) | set(gold.excluded) if gold is not None else set()
        by_tweet: dict[str, list] = {}
        for ann in crowd:
            if ann.tweet_id not in gold_ids:
                by_tweet.setdefault(ann.tweet_id, []).append(ann)
        for tweet_id in sorted(by_tweet):
            fine = aggregate_crowd(by_tweet[tweet_id], reliabilities)
            rows.append(
                {
                    "tweet_id": tweet_id,
                    "label_fine": fine,
                    "label_coarse": collapse_label(fine),
                    "provenance": Provenance.CROWD,
                }
            )
        report.counts["crowd"] = len(by_tweet)
        defined = {k: v for k, v in reliabilities.items() if v is not None}
        report.counts["annotators_with_reliability"] = len(defined)

    if not rows:
        raise UsageError("nothing to aggregate: pass --expert-annotations and/or --crowd-annotations")

    write_labels_csv(args.output, rows)
    report.add_output(args.output)
    report.write(_report_path(args, args.output))
    print(f"wrote {len(rows)} labels -> {args.output}")
    return 0


def cmd_agreement(args) -> int:
    report = RunReport(command="agreement", params={"granularity": args.granularity})
    report.add_input(args.annotations)
    annotations = read_annotations(args.annotations)

    by_annotator: dict[str, dict[str, object]] = {}
    for ann in annotations:
        label = ann.label if args.granularity == 4 else collapse_label(ann.label)
        by_annotator.setdefault(ann.annotator_id, {})[ann.tweet_id] = label

    result = mean_pairwise_kappa(by_annotator)
    payload = result.to_dict()
    payload["granularity"] = args.granularity
    if args.fleiss:
        try:
            payload["fleiss_kappa"] = fleiss_kappa(by_annotator)
        except MetricsError as exc:
            payload["fleiss_kappa"] = None
            payload["fleiss_error"] = str(exc)

    with atomic_text(args.output) as f:
        json.dump(payload, f, indent=2)
        f.write("\n")
    report.counts["annotators"] = len(by_annotator)
    report.counts["pairs"] = len(result.pair_kappas)
    report.add_output(args.output)
    report.write(_report_path(args, args.output))
    print(f"mean pairwise kappa {result.mean_kappa:.4f} over {len(result.pair_kappas)} pairs")
    return 0


def cmd_splits(args) -> int:
    report = RunReport(
        command="splits",
        params={"dev_size": args.dev_size, "test_size": args.test_size, "n_splits": args.n_splits},
        seeds={"splits": args.seed},
    )
    report.add_input(args.labels)
    rows = read_labels_csv(args.labels)
    expert_ids = [r["tweet_id"] for r in rows if r["provenance"] is Provenance.EXPERT]
    other_ids = [r["tweet_id"] for r in rows if r["provenance"] is not Provenance.EXPERT]

    need = args.dev_size + args.test_size
    if len(expert_ids) < need:
        raise AnnotationError(
            f"expert pool has {len(expert_ids)} items, fewer than dev+test={need}"
        )

    rng = np.random.default_rng(args.seed)
    splits = []
    for _ in range(args.n_splits):
        picked = rng.choice(len(expert_ids), size=need, replace=False)
        dev = sorted(expert_ids[int(i)] for i in picked[: args.dev_size])
        test = sorted(expert_ids[int(i)] for i in picked[args.dev_size :])
        held = set(dev) | set(test)
        expert_train = [tid for tid in expert_ids if tid not in held]
        # manifest bookkeeping must match the arithmetic exactly
        assert len(expert_train) == len(expert_ids) - need
        splits.append({"dev": dev, "test": test, "train": expert_train + other_ids})

    manifest = {
        "seed": args.seed,
        "dev_size": args.dev_size,
        "test_size": args.test_size,
        "expert_total": len(expert_ids),
        "expert_train": len(expert_ids) - need,
        "splits": splits,
    }
    with atomic_text(args.output) as f:
        json.dump(manifest, f, indent=2)
        f.write("\n")
    report.counts["expert_total"] = len(expert_ids)
    report.counts["expert_train"] = len(expert_ids) - need
    report.add_output(args.output)
    report.write(_report_path(args, args.output))
    print(f"{args.n_splits} splits ({len(expert_ids)} expert items, {len(expert_ids) - need} in train)")
    return 0


def _dataset_from_labels(corpus: Corpus, rows: list[dict], ids: set[str] | None = None) -> LabeledDataset:
    assignments = {
        r["tweet_id"]: (r["label_coarse"], r["provenance"])
        for r in rows
        if ids is None or r["tweet_id"] in ids
    }
    return LabeledDataset.from_corpus(corpus, assignments)


def cmd_train(args) -> int:
    cfg = TrainConfig(
        lr=args.lr,
        l2=args.l2,
        epochs=args.epochs,
        batch=args.batch,
        patience=args.patience,
        seed=args.seed,
        dim=args.dim,
        mode=FeatureMode(args.mode),
    )
    report = RunReport(command="train", params=cfg.to_dict(), seeds={"train": args.seed})
    report.add_input(args.corpus)
    report.add_input(args.labels)

    corpus = _load_corpus(args.corpus)
    rows = read_labels_csv(args.labels)

    if args.manifest:
        report.add_input(args.manifest)
        with open(args.manifest, "r", encoding="utf-8") as f:
            manifest = json.load(f)
        split = manifest["splits"][args.split]
        train_set = _dataset_from_labels(corpus, rows, set(split["train"]))
        dev_set = _dataset_from_labels(corpus, rows, set(split["dev"]))
    else:
        dataset = _dataset_from_labels(corpus, rows)
        rng = np.random.default_rng(args.seed)
        n_dev = max(1, int(len(dataset) * args.dev_fraction))
        dev_idx = set(int(i) for i in rng.choice(len(dataset), size=n_dev, replace=False))
        train_set = LabeledDataset.from_examples(
            ex for i, ex in enumerate(dataset) if i not in dev_idx
        )
        dev_set = LabeledDataset.from_examples(ex for i, ex in enumerate(dataset) if i in dev_idx)

    model = train_baseline(train_set, dev_set, cfg)
    with atomic_path(args.output) as tmp:
        model.save(tmp)
    report.counts["train_size"] = len(train_set)
    report.counts["dev_size"] = len(dev_set)
    report.counts["dev_macro_f1"] = model.metadata["dev_macro_f1"]
    report.counts["epochs_run"] = model.metadata["epochs_run"]
    report.add_output(args.output)
    report.write(_report_path(args, args.output))
    print(
        f"trained on {len(train_set)} items, dev macro-F1 "
        f"{model.metadata['dev_macro_f1']:.4f} -> {args.output}"
    )
    return 0


def cmd_autolabel(args) -> int:
    cfg = AutoLabelConfig(
        agreement_threshold=args.k,
        pool_size=len(args.model),
        per_class_cap=args.cap,
        seed=args.seed,
    )
    report = RunReport(
        command="autolabel",
        params={"k": cfg.agreement_threshold, "n": cfg.pool_size, "cap": cfg.per_class_cap},
        seeds={"autolabel": args.seed},
    )
    report.add_input(args.corpus)
    for path in args.model:
        report.add_input(path)

    corpus = _load_corpus(args.corpus)
    if args.exclude:
        report.add_input(args.exclude)
        exclude = {r["tweet_id"] for r in read_labels_csv(args.exclude)}
        corpus = Corpus.from_tweets(t for t in corpus if t.id not in exclude)

    pool = _load_models(args.model)
    result = auto_label(pool, corpus, cfg)

    with atomic_text(args.output) as out:
        write_autolabel_jsonl(result, out)
    report.counts["considered"] = result.n_considered
    report.counts["skipped"] = result.n_skipped
    report.counts["retained_before_cap"] = {
        label.value: n for label, n in result.n_retained_before_cap.items()
    }
    report.counts["kept"] = len(result.dataset)
    report.add_output(args.output)
    report.write(_report_path(args, args.output))
    print(f"auto-labeled {len(result.dataset)} of {result.n_considered} tweets -> {args.output}")
    return 0


def cmd_ensemble(args) -> int:
    report = RunReport(command="ensemble", params={"n_models": len(args.model)})
    report.add_input(args.corpus)
    for path in args.model:
        report.add_input(path)

    corpus = _load_corpus(args.corpus)
    if args.ids:
        report.add_input(args.ids)
        with open(args.ids, "r", encoding="utf-8") as f:
            wanted = {line.strip() for line in f if line.strip()}
        corpus = Corpus.from_tweets(t for t in corpus if t.id in wanted)

    pool = _load_models(args.model)
    with atomic_text(args.output) as out:
        for tweet in corpus:
            label = ensemble_predict(pool, tweet)
            json.dump({"id": tweet.id, "label": label.value}, out)
            out.write("\n")
    report.counts["predicted"] = len(corpus)
    report.add_output(args.output)
    report.write(_report_path(args, args.output))
    print(f"ensemble predictions for {len(corpus)} tweets -> {args.output}")
    return 0


def _read_confusion_csv(path) -> ConfusionMatrix:
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if not header or len(header) < 2:
            raise MetricsError(f"bad confusion CSV header in {path}")
        labels = tuple(h.strip() for h in header[1:])
        rows = []
        for row in reader:
            if not row:
                continue
            rows.append([int(c) for c in row[1 : len(labels) + 1]])
    return ConfusionMatrix.from_rows(labels, rows)


def cmd_eval(args) -> int:
    report = RunReport(command="eval", params={})
    if args.confusion:
        report.add_input(args.confusion)
        matrix = _read_confusion_csv(args.confusion)
    elif args.pred and args.labels:
        report.add_input(args.pred)
        report.add_input(args.labels)
        pred = _read_pred_jsonl(args.pred)
        rows = read_labels_csv(args.labels)
        gold = {r["tweet_id"]: r["label_coarse"] for r in rows}
        if args.manifest:
            report.add_input(args.manifest)
            with open(args.manifest, "r", encoding="utf-8") as f:
                manifest = json.load(f)
            wanted = set(manifest["splits"][args.split][args.partition])
            pred = {tid: label for tid, label in pred.items() if tid in wanted}
        pred = {tid: label for tid, label in pred.items() if tid in gold}
        labels = tuple(LabelCoarse)
        matrix = confusion(pred, gold, labels=labels)
    else:
        raise UsageError("pass either --confusion, or --pred with --labels")

    result = macro_f1(matrix)
    with atomic_text(args.output) as f:
        f.write(result.to_json())
        f.write("\n")
    if args.confusion_out:
        with atomic_path(args.confusion_out) as tmp:
            matrix.to_csv(tmp)
        report.add_output(args.confusion_out)
    report.counts["n"] = result.n
    report.counts["macro_f1"] = result.macro_f1
    report.add_output(args.output)
    report.write(_report_path(args, args.output))
    print(result.to_table())
    return 0


def cmd_trends(args) -> int:
    report = RunReport(command="trends", params={"zero_as_missing": not args.keep_zero_days})
    report.add_input(args.corpus)
    report.add_input(args.pred)

    corpus = _load_corpus(args.corpus)
    pred = _read_pred_jsonl(args.pred)
    labeled = LabeledDataset.from_corpus(
        corpus, {tid: (label, Provenance.AUTO) for tid, label in pred.items()}
    )
    series = daily_counts(labeled)
    ratio = sa_ratio(series)

    with atomic_text(args.output_daily, newline="") as f:
        write_daily_csv(series, f)
    report.add_output(args.output_daily)
    with atomic_text(args.output_ratio, newline="") as f:
        write_ratio_csv(ratio, f, zero_as_missing=not args.keep_zero_days)
    report.add_output(args.output_ratio)
    if args.output_long:
        with atomic_text(args.output_long, newline="") as f:
            write_long_csv(series, ratio, f)
        report.add_output(args.output_long)

    if args.weekly:
        weekly = weekly_average(series)
        report.counts["weekly_mean"] = weekly.mean
        report.counts["partial_weeks"] = len(weekly.partial_weeks)

    report.counts["days"] = len(series)
    report.counts["labeled"] = len(labeled)
    report.counts["undefined_ratio_days"] = len(ratio.undefined)
    report.write(_report_path(args, args.output_daily))
    print(f"daily counts for {len(series)} days -> {args.output_daily}")
    return 0


def cmd_correlate(args) -> int:
    report = RunReport(command="correlate", params={"label": args.label})
    report.add_input(args.daily)
    report.add_input(args.series)

    with open(args.daily, "r", encoding="utf-8", newline="") as f:
        series = read_daily_csv(f)
    with open(args.series, "r", encoding="utf-8", newline="") as f:
        external = read_external_csv(f)

    window = None
    if args.window_start or args.window_end:
        if not (args.window_start and args.window_end):
            raise UsageError("--window-start and --window-end must be given together")
        window = (date.fromisoformat(args.window_start), date.fromisoformat(args.window_end))
        report.params["window"] = [args.window_start, args.window_end]

    label = LabelCoarse(args.label)
    result = spearman(series.counts_for(label), external, window=window)
    with atomic_text(args.output) as f:
        json.dump(result.to_dict(), f, indent=2)
        f.write("\n")
    report.counts["rho"] = result.rho
    report.counts["n_days"] = result.n
    report.add_output(args.output)
    report.write(_report_path(args, args.output))
    print(f"spearman rho {result.rho:.4f} over {result.n} days")
    return 0


# --- parser -----------------------------------------------------------------


def build_parser() -> tuple[_Parser, dict[str, argparse.ArgumentParser]]:
    parser = _Parser(prog="solidarity", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    subparsers: dict[str, argparse.ArgumentParser] = {}

    # Flags a config file may supply are not argparse-required; presence is
    # validated after the config merge (see main).
    def command(name, help_text, func, required=()):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON file with default values for flags")
        p.add_argument("--report", help="run-report path (defaults to <output>.run.json)")
        p.set_defaults(func=func, _required=tuple(required))
        subparsers[name] = p
        return p

    p = command("ingest", "parse and validate a tweet JSONL file", cmd_ingest, ["input", "output"])
    p.add_argument("--input")
    p.add_argument("--output")
    p.add_argument("--lenient", action="store_true", help="skip bad lines instead of failing")
    p.add_argument("--window-start", help="ISO timestamp; reject tweets before this")
    p.add_argument("--window-end", help="ISO timestamp; reject tweets after this")

    p = command(
        "hashtags", "expand a seed hashtag set via co-occurrence", cmd_hashtags, ["input", "seeds", "output"]
    )
    p.add_argument("--input")
    p.add_argument("--seeds", help="comma-separated seed hashtags")
    p.add_argument("--min-cooccurrence", type=int, default=1)
    p.add_argument("--output")

    p = command(
        "aggregate", "build gold labels and aggregate crowd annotations", cmd_aggregate, ["output"]
    )
    p.add_argument("--expert-annotations")
    p.add_argument("--adjudications")
    p.add_argument("--crowd-annotations")
    p.add_argument("--granularity", type=int, choices=(3, 4), default=3)
    p.add_argument("--output")

    p = command(
        "agreement", "inter-annotator agreement statistics", cmd_agreement, ["annotations", "output"]
    )
    p.add_argument("--annotations")
    p.add_argument("--granularity", type=int, choices=(3, 4), default=3)
    p.add_argument("--fleiss", action="store_true", help="also compute Fleiss' kappa")
    p.add_argument("--output")

    p = command("splits", "sample dev/test manifests from the expert pool", cmd_splits, ["labels", "output"])
    p.add_argument("--labels")
    p.add_argument("--dev-size", type=int, default=170)
    p.add_argument("--test-size", type=int, default=170)
    p.add_argument("--n-splits", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output")

    p = command("train", "train the baseline classifier", cmd_train, ["corpus", "labels", "output"])
    p.add_argument("--corpus")
    p.add_argument("--labels")
    p.add_argument("--manifest", help="split manifest from `splits`")
    p.add_argument("--split", type=int, default=0)
    p.add_argument("--dev-fraction", type=float, default=0.1, help="used when no manifest is given")
    p.add_argument(
        "--mode", choices=[m.value for m in FeatureMode], default=FeatureMode.TEXT_AND_HASHTAGS.value
    )
    p.add_argument("--dim", type=int, default=2**18)
    p.add_argument("--lr", type=float, default=0.5)
    p.add_argument("--l2", type=float, default=1e-4)
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--batch", type=int, default=32)
    p.add_argument("--patience", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output")

    p = command(
        "autolabel", "self-label tweets where k of n models agree", cmd_autolabel, ["corpus", "model", "output"]
    )
    p.add_argument("--corpus")
    p.add_argument("--model", action="append", help="model file; repeat for the pool")
    p.add_argument("--exclude", help="labels CSV whose tweet ids are excluded")
    p.add_argument("--k", type=int, default=7)
    p.add_argument("--cap", type=int, default=35_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output")

    p = command(
        "ensemble", "majority-vote predictions over a model pool", cmd_ensemble, ["corpus", "model", "output"]
    )
    p.add_argument("--corpus")
    p.add_argument("--model", action="append")
    p.add_argument("--ids", help="file with one tweet id per line; restricts prediction")
    p.add_argument("--output")

    p = command("eval", "score predictions or a confusion matrix", cmd_eval, ["output"])
    p.add_argument("--confusion", help="confusion matrix CSV (gold rows, predicted columns)")
    p.add_argument("--pred", help="predictions JSONL with id and label")
    p.add_argument("--labels", help="gold labels CSV")
    p.add_argument("--manifest", help="restrict to one partition of a split manifest")
    p.add_argument("--split", type=int, default=0)
    p.add_argument("--partition", choices=("dev", "test", "train"), default="test")
    p.add_argument("--confusion-out", help="also write the confusion matrix CSV here")
    p.add_argument("--output")

    p = command(
        "trends", "daily label counts and the S/A ratio", cmd_trends, ["corpus", "pred", "output_daily", "output_ratio"]
    )
    p.add_argument("--corpus")
    p.add_argument("--pred", help="id -> label JSONL (predictions or auto labels)")
    p.add_argument("--output-daily")
    p.add_argument("--output-ratio")
    p.add_argument("--output-long", help="also write long-format date,metric,value CSV")
    p.add_argument("--weekly", action="store_true", help="report weekly averages")
    p.add_argument(
        "--keep-zero-days",
        action="store_true",
        help="keep days with A=0 as empty ratio cells instead of dropping them",
    )

    p = command(
        "correlate", "Spearman correlation against an external series", cmd_correlate, ["daily", "series", "output"]
    )
    p.add_argument("--daily", help="daily counts CSV from `trends`")
    p.add_argument("--series", help="external CSV date,value")
    p.add_argument("--label", choices=[l.value for l in LabelCoarse], default="A")
    p.add_argument("--window-start", help="ISO date")
    p.add_argument("--window-end", help="ISO date")
    p.add_argument("--output")

    return parser, subparsers


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subparsers = build_parser()
    try:
        _apply_config(subparsers, argv)
        args = parser.parse_args(argv)
        missing = [d for d in args._required if getattr(args, d, None) in (None, [])]
        if missing:
            flags = ", ".join("--" + d.replace("_", "-") for d in missing)
            raise UsageError(f"missing required flags: {flags}")
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except DATA_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry_point() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry_point()
