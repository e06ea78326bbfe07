"""Agreement and classification metrics: Cohen's kappa, pairwise kappa over
annotator sets, confusion matrices, and per-class / macro F1 reports.

All statistics are computed in double precision; rounding happens only when a
report is serialized.
"""

from __future__ import annotations

import csv
import json
import warnings
from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

Label = Hashable


def _label_str(label: Label) -> str:
    return str(getattr(label, "value", label))


class MetricsError(ValueError):
    """Raised on malformed metric inputs (length mismatch, empty data, ...)."""


@dataclass(frozen=True)
class KappaResult:
    """Chance-corrected agreement between two label sequences."""

    kappa: float
    observed_agreement: float
    expected_agreement: float
    n_items: int

    def to_dict(self) -> dict:
        return {
            "kappa": self.kappa,
            "observed_agreement": self.observed_agreement,
            "expected_agreement": self.expected_agreement,
            "n_items": self.n_items,
        }


def cohen_kappa(a: Sequence[Label], b: Sequence[Label]) -> KappaResult:
    """Cohen's kappa between two equal-length label sequences.

    kappa = (p_o - p_e) / (1 - p_e), with p_o the fraction of positions where
    the sequences agree and p_e the agreement expected from the two marginal
    label distributions. The degenerate case p_o = p_e = 1 (both raters use a
    single identical label) is defined as kappa = 1.
    """
    if len(a) != len(b):
        raise MetricsError(f"label sequences differ in length: {len(a)} vs {len(b)}")
    n = len(a)
    if n == 0:
        raise MetricsError("cannot compute kappa on empty sequences")

    p_o = sum(1 for x, y in zip(a, b) if x == y) / n
    marg_a = Counter(a)
    marg_b = Counter(b)
    p_e = sum(marg_a[c] * marg_b.get(c, 0) for c in marg_a) / (n * n)

    if p_e == 1.0:
        kappa = 1.0
    else:
        kappa = (p_o - p_e) / (1.0 - p_e)
    return KappaResult(kappa=kappa, observed_agreement=p_o, expected_agreement=p_e, n_items=n)


@dataclass(frozen=True)
class PairwiseKappaResult:
    """Mean Cohen's kappa over all annotator pairs with overlapping items.

    The multi-annotator statistic is the unweighted mean of per-pair kappas,
    each computed on that pair's overlap; this interpretation is recorded in
    the `method` field so downstream reports carry it.
    """

    mean_kappa: float
    pair_kappas: dict[tuple[str, str], KappaResult]
    skipped_pairs: tuple[tuple[str, str], ...]
    method: str = "mean-pairwise-cohen"

    def to_dict(self) -> dict:
        return {
            "mean_kappa": self.mean_kappa,
            "method": self.method,
            "pairs": {f"{a}|{b}": r.to_dict() for (a, b), r in self.pair_kappas.items()},
            "skipped_pairs": [list(p) for p in self.skipped_pairs],
        }


def mean_pairwise_kappa(
    labels_by_annotator: Mapping[str, Mapping[str, Label]],
) -> PairwiseKappaResult:
    """Unweighted mean of Cohen's kappa over all annotator pairs.

    `labels_by_annotator` maps annotator id to an item -> label mapping;
    missing entries are simply absent. Each pair is scored on its overlapping
    items; pairs with zero overlap are skipped and reported.
    """
    annotators = sorted(labels_by_annotator)
    if len(annotators) < 2:
        raise MetricsError("need at least 2 annotators for pairwise kappa")

    pair_kappas: dict[tuple[str, str], KappaResult] = {}
    skipped: list[tuple[str, str]] = []
    for a, b in combinations(annotators, 2):
        la, lb = labels_by_annotator[a], labels_by_annotator[b]
        overlap = sorted(set(la) & set(lb))
        if not overlap:
            skipped.append((a, b))
            continue
        pair_kappas[(a, b)] = cohen_kappa([la[i] for i in overlap], [lb[i] for i in overlap])

    if not pair_kappas:
        raise MetricsError("no annotator pair shares any item")
    mean = sum(r.kappa for r in pair_kappas.values()) / len(pair_kappas)
    return PairwiseKappaResult(mean_kappa=mean, pair_kappas=pair_kappas, skipped_pairs=tuple(skipped))


def fleiss_kappa(labels_by_annotator: Mapping[str, Mapping[str, Label]]) -> float:
    """Fleiss' kappa over the items annotated by every annotator.

    Alternative multi-annotator statistic, offered behind this separate entry
    point; the default pipeline statistic is `mean_pairwise_kappa`. Only items
    labeled by all annotators enter the computation.
    """
    annotators = sorted(labels_by_annotator)
    if len(annotators) < 2:
        raise MetricsError("need at least 2 annotators for Fleiss' kappa")
    items = sorted(set.intersection(*(set(labels_by_annotator[a]) for a in annotators)))
    if not items:
        raise MetricsError("no item is labeled by all annotators")

    categories = sorted({labels_by_annotator[a][i] for a in annotators for i in items}, key=repr)
    n_raters = len(annotators)
    table = np.zeros((len(items), len(categories)))
    cat_index = {c: j for j, c in enumerate(categories)}
    for row, item in enumerate(items):
        for a in annotators:
            table[row, cat_index[labels_by_annotator[a][item]]] += 1

    p_i = (np.sum(table * (table - 1), axis=1)) / (n_raters * (n_raters - 1))
    p_j = np.sum(table, axis=0) / (len(items) * n_raters)
    p_bar = float(np.mean(p_i))
    p_e = float(np.sum(p_j**2))
    if p_e == 1.0:
        return 1.0
    return (p_bar - p_e) / (1.0 - p_e)


@dataclass(frozen=True)
class ConfusionMatrix:
    """Square count matrix over an ordered label set; rows are gold labels,
    columns are predictions."""

    labels: tuple[Label, ...]
    counts: np.ndarray = field(repr=False)

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        k = len(self.labels)
        if counts.shape != (k, k):
            raise MetricsError(f"counts must be {k}x{k}, got {counts.shape}")
        if (counts < 0).any():
            raise MetricsError("confusion counts must be non-negative")
        object.__setattr__(self, "counts", counts)

    @property
    def n_items(self) -> int:
        return int(self.counts.sum())

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as f:
            w = csv.writer(f)
            w.writerow(["gold\\pred"] + [_label_str(l) for l in self.labels])
            for label, row in zip(self.labels, self.counts):
                w.writerow([_label_str(label)] + [int(c) for c in row])

    @classmethod
    def from_rows(cls, labels: Sequence[Label], rows: Sequence[Sequence[int]]) -> "ConfusionMatrix":
        return cls(labels=tuple(labels), counts=np.asarray(rows, dtype=np.int64))


def confusion(
    pred: Mapping[str, Label] | Iterable[tuple[str, Label]],
    gold: Mapping[str, Label],
    labels: Sequence[Label] | None = None,
) -> ConfusionMatrix:
    """Build a confusion matrix from per-item predictions against gold labels.

    Every predicted item must have a gold label. When `labels` is omitted the
    label set is the sorted union of observed gold and predicted labels.
    """
    pairs = list(pred.items()) if isinstance(pred, Mapping) else list(pred)
    missing = [item for item, _ in pairs if item not in gold]
    if missing:
        raise MetricsError(f"{len(missing)} predicted items lack a gold label, e.g. {missing[0]!r}")

    if labels is None:
        labels = sorted({gold[i] for i, _ in pairs} | {p for _, p in pairs}, key=repr)
    labels = tuple(labels)
    index = {l: i for i, l in enumerate(labels)}
    counts = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for item, p in pairs:
        g = gold[item]
        if g not in index or p not in index:
            raise MetricsError(f"label outside the declared label set: {g!r} / {p!r}")
        counts[index[g], index[p]] += 1
    return ConfusionMatrix(labels=labels, counts=counts)


@dataclass(frozen=True)
class MetricsReport:
    """Per-class precision/recall/F1 plus macro-F1 and accuracy."""

    labels: tuple[Label, ...]
    precision: dict[Label, float]
    recall: dict[Label, float]
    f1: dict[Label, float]
    macro_f1: float
    accuracy: float
    n: int

    def to_dict(self) -> dict:
        return {
            "labels": [_label_str(l) for l in self.labels],
            "per_class": {
                _label_str(l): {
                    "precision": self.precision[l],
                    "recall": self.recall[l],
                    "f1": self.f1[l],
                }
                for l in self.labels
            },
            "macro_f1": self.macro_f1,
            "accuracy": self.accuracy,
            "n": self.n,
        }

    def to_json(self, ndigits: int = 6) -> str:
        def _round(x):
            if isinstance(x, float):
                return round(x, ndigits)
            if isinstance(x, dict):
                return {k: _round(v) for k, v in x.items()}
            return x

        return json.dumps(_round(self.to_dict()), indent=2)

    def to_table(self) -> str:
        lines = [f"{'class':>8} {'precision':>10} {'recall':>10} {'f1':>10}"]
        for l in self.labels:
            lines.append(
                f"{_label_str(l):>8} {self.precision[l]:>10.4f} {self.recall[l]:>10.4f} {self.f1[l]:>10.4f}"
            )
        lines.append(f"macro-F1 {self.macro_f1:.4f}  accuracy {self.accuracy:.4f}  n={self.n}")
        return "\n".join(lines)


def macro_f1(m: ConfusionMatrix) -> MetricsReport:
    """Per-class precision/recall/F1 and their unweighted mean.

    precision_c = diagonal / column sum, recall_c = diagonal / row sum, F1 the
    harmonic mean (0 when precision and recall are both 0). A class with no
    gold items gets F1 = 0 and a warning rather than an error.
    """
    if m.n_items == 0:
        raise MetricsError("cannot score an empty confusion matrix")

    counts = m.counts.astype(np.float64)
    diag = np.diag(counts)
    col = counts.sum(axis=0)
    row = counts.sum(axis=1)

    precision: dict[Label, float] = {}
    recall: dict[Label, float] = {}
    f1: dict[Label, float] = {}
    for i, label in enumerate(m.labels):
        p = diag[i] / col[i] if col[i] > 0 else 0.0
        r = diag[i] / row[i] if row[i] > 0 else 0.0
        if row[i] == 0:
            warnings.warn(f"class {label!r} has no gold items; F1 set to 0", stacklevel=2)
        f = 2 * p * r / (p + r) if (p + r) > 0 else 0.0
        precision[label], recall[label], f1[label] = float(p), float(r), float(f)

    return MetricsReport(
        labels=m.labels,
        precision=precision,
        recall=recall,
        f1=f1,
        macro_f1=float(np.mean([f1[l] for l in m.labels])),
        accuracy=float(diag.sum() / counts.sum()),
        n=m.n_items,
    )
