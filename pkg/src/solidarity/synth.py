"""Deterministic synthetic fixtures: a small tweet corpus with expert/crowd
annotations, plus purpose-built datasets for classifier checks.

Everything is driven by numpy generators with explicit seeds, so a fixture
regenerated with the same parameters is byte-identical. The shipped 500-tweet
fixture under tests/data/fixture500 comes from `write_fixture`; regenerate it
with: python -m solidarity.synth --out DIR
"""

from __future__ import annotations

import argparse
import csv
from collections import Counter
from datetime import date, datetime, timedelta, timezone
from pathlib import Path

import numpy as np

from .annotation import Annotation, LabelCoarse, LabelFine, write_annotations
from .augment import LabeledDataset, LabeledExample, Provenance
from .corpus import Corpus, Tweet, write_corpus

_WORDS = {
    "en": {
        LabelCoarse.S: ["welcome", "help", "support", "together", "share", "donate", "stand", "protect"],
        LabelCoarse.A: ["closed", "reject", "expel", "burden", "invasion", "illegal", "refuse", "walls"],
        LabelCoarse.O: ["report", "meeting", "weather", "question", "update", "unclear", "news", "photo"],
        "filler": ["the", "a", "to", "and", "of", "in", "we", "is", "on", "for"],
    },
    "de": {
        LabelCoarse.S: ["willkommen", "helfen", "zusammen", "teilen", "spenden", "schützen", "aufnehmen"],
        LabelCoarse.A: ["abschieben", "ablehnen", "belastung", "zuerst", "dicht", "kriminell", "raus"],
        LabelCoarse.O: ["bericht", "treffen", "wetter", "frage", "vielleicht", "unklar", "nachrichten"],
        "filler": ["die", "der", "und", "wir", "das", "ist", "auf", "für"],
    },
}

_TAGS = {
    LabelCoarse.S: ["refugeeswelcome", "leavenoonebehind", "seenotrettung", "wirhabenplatz", "eusolidarity"],
    LabelCoarse.A: ["refugeesnotwelcome", "niewieder2015", "remigration", "asylkrise"],
    LabelCoarse.O: ["refugees", "eurobonds", "eu", "refugeecrisis", "flüchtlinge", "migrationskrise"],
}

FIXTURE_START = date(2020, 2, 1)
FIXTURE_DAYS = 182


def _pick(rng: np.random.Generator, pool: list[str], k: int) -> list[str]:
    return [pool[int(i)] for i in rng.integers(0, len(pool), size=k)]


def _compose_text(rng: np.random.Generator, lang: str, label: LabelCoarse) -> str:
    vocab = _WORDS[lang]
    words = _pick(rng, vocab["filler"], int(rng.integers(2, 5))) + _pick(rng, vocab[label], int(rng.integers(3, 6)))
    if rng.random() < 0.15:  # mild cross-class bleed keeps the task imperfect
        other = [l for l in (LabelCoarse.S, LabelCoarse.A, LabelCoarse.O) if l != label]
        words += _pick(rng, vocab[other[int(rng.integers(0, 2))]], 1)
    order = rng.permutation(len(words))
    words = [words[int(i)] for i in order]

    n_tags = int(rng.integers(0, 3))
    tag_pool = _TAGS[label] + _TAGS[LabelCoarse.O]
    tags = [f"#{t}" for t in _pick(rng, tag_pool, n_tags)]
    return " ".join(words + tags)


def _day_weights(label: LabelCoarse) -> np.ndarray:
    days = np.arange(FIXTURE_DAYS, dtype=float)
    base = np.ones(FIXTURE_DAYS)
    if label is LabelCoarse.A:
        base += 3.0 * np.exp(-((days - 35.0) ** 2) / (2 * 8.0**2))  # early-March surge
    elif label is LabelCoarse.S:
        base += 1.5 * np.exp(-((days - 45.0) ** 2) / (2 * 12.0**2))
    return base / base.sum()


def synthetic_corpus(n: int = 500, seed: int = 0) -> tuple[Corpus, dict[str, LabelCoarse]]:
    """Corpus of n synthetic tweets with their underlying true coarse labels."""
    rng = np.random.default_rng(seed)
    weights = {label: _day_weights(label) for label in LabelCoarse}

    tweets: list[Tweet] = []
    truth: dict[str, LabelCoarse] = {}
    labels = rng.choice(3, size=n, p=[0.45, 0.25, 0.30])
    langs = rng.choice(2, size=n, p=[0.55, 0.45])
    for i in range(n):
        label = (LabelCoarse.S, LabelCoarse.A, LabelCoarse.O)[int(labels[i])]
        lang = ("en", "de")[int(langs[i])]
        day = int(rng.choice(FIXTURE_DAYS, p=weights[label]))
        second = int(rng.integers(0, 86_400))
        created = datetime.combine(FIXTURE_START, datetime.min.time(), tzinfo=timezone.utc) + timedelta(
            days=day, seconds=second
        )
        tweet_id = f"t{i + 1:04d}"
        tweets.append(Tweet.create(id=tweet_id, text=_compose_text(rng, lang, label), lang=lang, created_at=created))
        truth[tweet_id] = label
    return Corpus.from_tweets(tweets), truth


def _fine_label(rng: np.random.Generator, coarse: LabelCoarse) -> LabelFine:
    if coarse is LabelCoarse.S:
        return LabelFine.SOLIDARITY
    if coarse is LabelCoarse.A:
        return LabelFine.ANTI_SOLIDARITY
    return LabelFine.AMBIVALENT if rng.random() < 0.5 else LabelFine.NOT_APPLICABLE


def _noisy(rng: np.random.Generator, label: LabelFine, noise: float) -> LabelFine:
    if rng.random() >= noise:
        return label
    others = [l for l in LabelFine if l != label]
    return others[int(rng.integers(0, len(others)))]


def synthetic_annotations(
    corpus: Corpus,
    truth: dict[str, LabelCoarse],
    seed: int = 0,
    n_expert_tweets: int = 170,
    n_crowd_tweets: int | None = 180,
    n_crowd_annotators: int = 8,
    overlap_per_annotator: int = 30,
) -> tuple[list[Annotation], list[Annotation], dict[str, LabelFine | str]]:
    """Expert and crowd annotation sets over a synthetic corpus.

    Three experts label the expert subset; crowd annotators (with differing
    noise rates) label a disjoint crowd subset 2-3 at a time and additionally
    re-label a slice of the expert subset, which gives every crowd annotator
    gold overlap for reliability estimates. The rest of the corpus stays
    unannotated, leaving raw material for self-labeling. Adjudications cover
    exactly the expert tweets without a unique majority; a few stay undecided.
    """
    rng = np.random.default_rng(seed + 1)
    ids = [t.id for t in corpus]
    expert_ids = sorted(rng.choice(len(ids), size=n_expert_tweets, replace=False))
    expert_set = [ids[int(i)] for i in expert_ids]
    crowd_set = [i for i in ids if i not in set(expert_set)]
    if n_crowd_tweets is not None:
        crowd_set = crowd_set[:n_crowd_tweets]

    true_fine = {tid: _fine_label(rng, truth[tid]) for tid in ids}

    experts = ["exp1", "exp2", "exp3"]
    expert_annotations = [
        Annotation(tweet_id=tid, annotator_id=who, label=_noisy(rng, true_fine[tid], 0.12), stage="expert")
        for tid in expert_set
        for who in experts
    ]

    adjudications: dict[str, LabelFine | str] = {}
    votes_by_tweet: dict[str, list[LabelFine]] = {}
    for ann in expert_annotations:
        votes_by_tweet.setdefault(ann.tweet_id, []).append(ann.label)
    for tid, votes in votes_by_tweet.items():
        top = Counter(votes).most_common()
        if len(top) > 1 and top[0][1] == top[1][1]:
            adjudications[tid] = "undecided" if rng.random() < 0.15 else true_fine[tid]

    students = [f"stu{i + 1}" for i in range(n_crowd_annotators)]
    noise_rates = np.linspace(0.05, 0.35, n_crowd_annotators)
    crowd_annotations: list[Annotation] = []
    for tid in crowd_set:
        k = 3 if rng.random() < 0.7 else 2
        who = rng.choice(n_crowd_annotators, size=k, replace=False)
        for w in who:
            crowd_annotations.append(
                Annotation(
                    tweet_id=tid,
                    annotator_id=students[int(w)],
                    label=_noisy(rng, true_fine[tid], float(noise_rates[int(w)])),
                    stage="novel",
                )
            )
    for w, student in enumerate(students):
        overlap = rng.choice(len(expert_set), size=min(overlap_per_annotator, len(expert_set)), replace=False)
        for i in overlap:
            tid = expert_set[int(i)]
            crowd_annotations.append(
                Annotation(
                    tweet_id=tid,
                    annotator_id=student,
                    label=_noisy(rng, true_fine[tid], float(noise_rates[w])),
                    stage="gold-overlap",
                )
            )

    return expert_annotations, crowd_annotations, adjudications


def infection_series(corpus: Corpus, truth: dict[str, LabelCoarse], seed: int = 0) -> dict[date, float]:
    """Synthetic per-day infection counts that loosely track the true number
    of anti-solidarity tweets."""
    rng = np.random.default_rng(seed + 2)
    a_per_day: dict[date, int] = {}
    for tweet in corpus:
        if truth[tweet.id] is LabelCoarse.A:
            day = tweet.created_at.date()
            a_per_day[day] = a_per_day.get(day, 0) + 1
    out: dict[date, float] = {}
    for offset in range(FIXTURE_DAYS):
        day = FIXTURE_START + timedelta(days=offset)
        value = 10.0 + 3.0 * a_per_day.get(day, 0) + float(rng.normal(0, 1.5))
        out[day] = round(max(value, 0.0), 1)
    return out


def separable_dataset(
    n_per_class: int = 100,
    dev_per_class: int = 20,
    seed: int = 0,
) -> tuple[LabeledDataset, LabeledDataset]:
    """Linearly separable 3-class set: per-class vocabularies are disjoint, so
    any convergent linear model can hit high dev macro-F1."""
    rng = np.random.default_rng(seed)
    vocab = {
        LabelCoarse.S: [f"sun{i}" for i in range(12)],
        LabelCoarse.A: [f"moon{i}" for i in range(12)],
        LabelCoarse.O: [f"star{i}" for i in range(12)],
    }
    start = datetime(2020, 1, 1, tzinfo=timezone.utc)

    def make(split: str, count: int) -> list[LabeledExample]:
        examples = []
        for label in (LabelCoarse.S, LabelCoarse.A, LabelCoarse.O):
            for i in range(count):
                text = " ".join(_pick(rng, vocab[label], 5))
                tweet = Tweet.create(
                    id=f"{split}-{label.value}-{i}",
                    text=text,
                    lang="en",
                    created_at=start + timedelta(minutes=i),
                )
                examples.append(LabeledExample(tweet=tweet, label=label, provenance=Provenance.EXPERT))
        return examples

    return (
        LabeledDataset.from_examples(make("train", n_per_class)),
        LabeledDataset.from_examples(make("dev", dev_per_class)),
    )


def text_signal_dataset(
    n_per_class: int = 120,
    dev_per_class: int = 30,
    seed: int = 0,
) -> tuple[LabeledDataset, LabeledDataset]:
    """Labels depend only on the body text; every tweet also carries hashtags
    drawn from one shared, uninformative pool."""
    rng = np.random.default_rng(seed)
    vocab = {
        LabelCoarse.S: [f"red{i}" for i in range(10)],
        LabelCoarse.A: [f"green{i}" for i in range(10)],
        LabelCoarse.O: [f"blue{i}" for i in range(10)],
    }
    tag_pool = [f"#topic{i}" for i in range(6)]
    start = datetime(2020, 1, 1, tzinfo=timezone.utc)

    def make(split: str, count: int) -> list[LabeledExample]:
        examples = []
        for label in (LabelCoarse.S, LabelCoarse.A, LabelCoarse.O):
            for i in range(count):
                words = _pick(rng, vocab[label], 5) + _pick(rng, tag_pool, 2)
                tweet = Tweet.create(
                    id=f"{split}-{label.value}-{i}",
                    text=" ".join(words),
                    lang="en",
                    created_at=start + timedelta(minutes=i),
                )
                examples.append(LabeledExample(tweet=tweet, label=label, provenance=Provenance.EXPERT))
        return examples

    return (
        LabeledDataset.from_examples(make("train", n_per_class)),
        LabeledDataset.from_examples(make("dev", dev_per_class)),
    )


def write_fixture(outdir: str | Path, n: int = 500, seed: int = 0) -> None:
    """Write the full synthetic fixture: tweets.jsonl, expert and crowd
    annotation CSVs, adjudications.csv, and infections.csv."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    corpus, truth = synthetic_corpus(n=n, seed=seed)
    expert_anns, crowd_anns, adjudications = synthetic_annotations(corpus, truth, seed=seed)
    infections = infection_series(corpus, truth, seed=seed)

    with open(outdir / "tweets.jsonl", "w", encoding="utf-8") as f:
        write_corpus(corpus, f)

    write_annotations(outdir / "expert_annotations.csv", expert_anns)
    write_annotations(outdir / "crowd_annotations.csv", crowd_anns)

    with open(outdir / "adjudications.csv", "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f)
        w.writerow(["tweet_id", "label"])
        for tid in sorted(adjudications):
            value = adjudications[tid]
            w.writerow([tid, value if isinstance(value, str) else int(value)])

    with open(outdir / "infections.csv", "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f)
        w.writerow(["date", "value"])
        for day, value in infections.items():
            w.writerow([day.isoformat(), value])


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description="regenerate the synthetic fixture")
    parser.add_argument("--out", required=True)
    parser.add_argument("--n", type=int, default=500)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    write_fixture(args.out, n=args.n, seed=args.seed)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
