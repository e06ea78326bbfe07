"""Human label handling: fine and coarse label schemes, expert gold-standard
construction, per-annotator reliability, and crowd label aggregation.
"""

from __future__ import annotations

import csv
from collections import Counter, defaultdict
from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import Iterable, Mapping

from .metrics import cohen_kappa


class LabelFine(IntEnum):
    """Fine-grained annotation scheme; the integer coding is fixed."""

    SOLIDARITY = 0
    ANTI_SOLIDARITY = 1
    AMBIVALENT = 2
    NOT_APPLICABLE = 3


class LabelCoarse(str, Enum):
    """Three-class scheme used by the classifiers. Class order is S, A, O
    everywhere (vector index 0, 1, 2)."""

    S = "S"
    A = "A"
    O = "O"

    @property
    def index(self) -> int:
        return COARSE_ORDER.index(self)


COARSE_ORDER: tuple[LabelCoarse, ...] = (LabelCoarse.S, LabelCoarse.A, LabelCoarse.O)

UNDECIDED = "undecided"

_COLLAPSE = {
    LabelFine.SOLIDARITY: LabelCoarse.S,
    LabelFine.ANTI_SOLIDARITY: LabelCoarse.A,
    LabelFine.AMBIVALENT: LabelCoarse.O,
    LabelFine.NOT_APPLICABLE: LabelCoarse.O,
}


def collapse_label(label: LabelFine) -> LabelCoarse:
    """Collapse the 4-class scheme to 3 classes: ambivalent and not-applicable
    both map to O."""
    return _COLLAPSE[LabelFine(label)]


@dataclass(frozen=True)
class Annotation:
    """One (tweet, annotator, fine label) judgment; `stage` is free metadata
    recording the annotation round."""

    tweet_id: str
    annotator_id: str
    label: LabelFine
    stage: str | None = None


@dataclass(frozen=True)
class AnnotatorProfile:
    """Annotator identity plus reliability, the kappa agreement with the
    expert gold. Reliability is None when the annotator never overlaps the
    gold standard."""

    annotator_id: str
    kind: str  # "expert" | "crowd"
    reliability: float | None = None


@dataclass(frozen=True)
class GoldStandard:
    """Adjudicated expert label per tweet; unresolved tweets live in
    `excluded` and never appear in `labels`."""

    labels: dict[str, LabelFine]
    excluded: frozenset[str]

    def __post_init__(self):
        clash = set(self.labels) & self.excluded
        if clash:
            raise AnnotationError(f"tweets both labeled and excluded: {sorted(clash)[:3]}")


class AnnotationError(ValueError):
    pass


def build_gold(
    expert_annotations: Iterable[Annotation],
    adjudications: Mapping[str, LabelFine | str] | None = None,
) -> GoldStandard:
    """Derive the gold standard from expert votes plus adjudications.

    A tweet with a unique majority among its expert fine labels gets that
    label. Otherwise the adjudication entry decides; the sentinel value
    "undecided" excludes the tweet. A tweet with neither a unique majority nor
    an adjudication entry is an error.
    """
    adjudications = adjudications or {}
    votes: dict[str, list[LabelFine]] = defaultdict(list)
    seen: set[tuple[str, str]] = set()
    for ann in expert_annotations:
        key = (ann.tweet_id, ann.annotator_id)
        if key in seen:
            raise AnnotationError(f"duplicate annotation for tweet {ann.tweet_id!r} by {ann.annotator_id!r}")
        seen.add(key)
        votes[ann.tweet_id].append(ann.label)

    labels: dict[str, LabelFine] = {}
    excluded: set[str] = set()
    for tweet_id, tweet_votes in votes.items():
        counts = Counter(tweet_votes)
        top = counts.most_common()
        if len(top) == 1 or top[0][1] > top[1][1]:
            labels[tweet_id] = top[0][0]
            continue
        if tweet_id not in adjudications:
            raise AnnotationError(f"tweet {tweet_id!r} has no unique majority and no adjudication")
        decision = adjudications[tweet_id]
        if decision == UNDECIDED:
            excluded.add(tweet_id)
        else:
            labels[tweet_id] = LabelFine(decision)
    return GoldStandard(labels=labels, excluded=frozenset(excluded))


def compute_reliability(
    crowd_annotations: Iterable[Annotation],
    gold: GoldStandard,
    granularity: int = 3,
) -> dict[str, float | None]:
    """Per-annotator Cohen's kappa against the gold standard.

    Agreement is scored on the tweets where the annotator overlaps the gold,
    at 3-class (default, labels collapsed) or 4-class granularity. Annotators
    with zero overlap map to None: their reliability is undefined and they
    lose reliability tie-breaks.
    """
    if granularity not in (3, 4):
        raise AnnotationError(f"granularity must be 3 or 4, got {granularity}")
    by_annotator: dict[str, dict[str, LabelFine]] = defaultdict(dict)
    for ann in crowd_annotations:
        by_annotator[ann.annotator_id][ann.tweet_id] = ann.label

    out: dict[str, float | None] = {}
    for annotator_id, theirs in by_annotator.items():
        overlap = sorted(set(theirs) & set(gold.labels))
        if not overlap:
            out[annotator_id] = None
            continue
        a = [theirs[t] for t in overlap]
        b = [gold.labels[t] for t in overlap]
        if granularity == 3:
            a = [collapse_label(x) for x in a]
            b = [collapse_label(x) for x in b]
        out[annotator_id] = cohen_kappa(a, b).kappa
    return out


def aggregate_crowd(
    annotations: Iterable[Annotation],
    profiles: Mapping[str, AnnotatorProfile] | Mapping[str, float | None] | None = None,
) -> LabelFine:
    """Aggregate the crowd annotations of a single tweet into one fine label.

    The unique most-frequent label wins. On a tie, the vote of the most
    reliable annotator among the tied-top labels' voters decides; annotators
    without a defined reliability lose to any annotator with one, and residual
    ties fall back to lexicographic annotator id so the result never depends
    on input order.
    """
    anns = list(annotations)
    if not anns:
        raise AnnotationError("cannot aggregate zero annotations")
    tweet_ids = {a.tweet_id for a in anns}
    if len(tweet_ids) > 1:
        raise AnnotationError(f"annotations span multiple tweets: {sorted(tweet_ids)}")

    counts = Counter(a.label for a in anns)
    top = counts.most_common()
    if len(top) == 1 or top[0][1] > top[1][1]:
        return top[0][0]

    top_count = top[0][1]
    tied_labels = {label for label, c in counts.items() if c == top_count}

    def reliability_of(annotator_id: str) -> float | None:
        if profiles is None:
            return None
        entry = profiles.get(annotator_id)
        if entry is None:
            return None
        if isinstance(entry, AnnotatorProfile):
            return entry.reliability
        return entry

    candidates = [a for a in anns if a.label in tied_labels]
    best = min(
        candidates,
        key=lambda a: (
            0 if reliability_of(a.annotator_id) is not None else 1,
            -(reliability_of(a.annotator_id) or 0.0),
            a.annotator_id,
        ),
    )
    return best.label


def build_profiles(
    reliabilities: Mapping[str, float | None],
    kind: str = "crowd",
) -> dict[str, AnnotatorProfile]:
    """Wrap a reliability mapping into AnnotatorProfile records."""
    return {
        annotator_id: AnnotatorProfile(annotator_id=annotator_id, kind=kind, reliability=rel)
        for annotator_id, rel in reliabilities.items()
    }


# --- CSV interfaces ---------------------------------------------------------
#
# Annotations file: header tweet_id,annotator_id,label[,stage], label in 0..3.
# Adjudications file: header tweet_id,label, label in 0..3 or "undecided".


def read_annotations(path) -> list[Annotation]:
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        required = {"tweet_id", "annotator_id", "label"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise AnnotationError(f"annotations file {path} must have columns {sorted(required)}")
        out = []
        for lineno, row in enumerate(reader, start=2):
            try:
                label = LabelFine(int(row["label"]))
            except (ValueError, KeyError) as exc:
                raise AnnotationError(f"{path}:{lineno}: bad label {row.get('label')!r}") from exc
            stage = row.get("stage") or None
            out.append(
                Annotation(
                    tweet_id=row["tweet_id"],
                    annotator_id=row["annotator_id"],
                    label=label,
                    stage=stage,
                )
            )
    return out


def write_annotations(path, annotations: Iterable[Annotation]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f)
        w.writerow(["tweet_id", "annotator_id", "label", "stage"])
        for ann in annotations:
            w.writerow([ann.tweet_id, ann.annotator_id, int(ann.label), ann.stage or ""])


def read_adjudications(path) -> dict[str, LabelFine | str]:
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None or not {"tweet_id", "label"}.issubset(reader.fieldnames):
            raise AnnotationError(f"adjudications file {path} must have columns tweet_id,label")
        out: dict[str, LabelFine | str] = {}
        for lineno, row in enumerate(reader, start=2):
            raw = row["label"].strip()
            if raw == UNDECIDED:
                out[row["tweet_id"]] = UNDECIDED
            else:
                try:
                    out[row["tweet_id"]] = LabelFine(int(raw))
                except ValueError as exc:
                    raise AnnotationError(f"{path}:{lineno}: bad label {raw!r}") from exc
    return out
