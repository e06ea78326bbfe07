"""Self-labeling and ensembling over a pool of classifiers: keep tweets where
at least k of n models agree, cap the per-class intake, and majority-vote at
prediction time.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

import numpy as np

from .annotation import COARSE_ORDER, LabelCoarse
from .augment import LabeledDataset, LabeledExample, Provenance
from .corpus import Corpus, Tweet
from .model import ClassifierHandle, predict


class PoolError(ValueError):
    pass


@dataclass(frozen=True)
class ModelPool:
    """Ordered classifier handles with unique ids; dev scores, when set, lie
    in [0, 1]."""

    handles: tuple[ClassifierHandle, ...]

    def __post_init__(self):
        ids = [h.id for h in self.handles]
        if len(set(ids)) != len(ids):
            raise PoolError("pool ids must be unique")
        for h in self.handles:
            if h.dev_score is not None and not (0.0 <= h.dev_score <= 1.0):
                raise PoolError(f"dev_score of {h.id!r} outside [0, 1]: {h.dev_score}")

    @classmethod
    def of(cls, handles: Iterable[ClassifierHandle]) -> "ModelPool":
        return cls(handles=tuple(handles))

    def __len__(self) -> int:
        return len(self.handles)

    def __iter__(self):
        return iter(self.handles)


@dataclass(frozen=True)
class AutoLabelConfig:
    """Self-labeling knobs: agreement threshold k out of a pool of n, per-class
    cap m, and the sampling seed."""

    agreement_threshold: int = 7
    pool_size: int = 9
    per_class_cap: int = 35_000
    seed: int = 0

    def __post_init__(self):
        if not (1 <= self.agreement_threshold <= self.pool_size):
            raise PoolError(
                f"need 1 <= k <= n, got k={self.agreement_threshold}, n={self.pool_size}"
            )
        if self.per_class_cap < 1:
            raise PoolError(f"per-class cap must be >= 1, got {self.per_class_cap}")


def select_top_k(pool: ModelPool, k: int) -> ModelPool:
    """The k handles with the highest dev score; ties keep the earlier pool
    position."""
    if k > len(pool):
        raise PoolError(f"k={k} exceeds pool size {len(pool)}")
    missing = [h.id for h in pool if h.dev_score is None]
    if missing:
        raise PoolError(f"handles without dev_score: {missing}")
    ranked = sorted(pool, key=lambda h: -h.dev_score)  # stable: ties keep pool order
    return ModelPool.of(ranked[:k])


def count_votes(labels: Iterable[LabelCoarse]) -> dict[LabelCoarse, int]:
    votes = {label: 0 for label in COARSE_ORDER}
    for label in labels:
        votes[label] += 1
    return votes


def retained_label(votes: dict[LabelCoarse, int], k: int) -> LabelCoarse | None:
    """The label to keep a tweet under, or None.

    A tweet is retained when its top label reaches at least k votes and the
    top is unique; an exact tie at the top (possible only for k <= n/2) is
    ambiguous and discarded, which keeps retention monotone in k.
    """
    top = max(votes.values())
    if top < k:
        return None
    leaders = [label for label in COARSE_ORDER if votes[label] == top]
    if len(leaders) > 1:
        return None
    return leaders[0]


@dataclass
class AutoLabelResult:
    """Auto-labeled dataset plus the vote record and skip accounting that the
    run report surfaces."""

    dataset: LabeledDataset
    votes: dict[str, dict[LabelCoarse, int]]
    n_considered: int
    n_skipped: int  # prediction failures
    n_retained_before_cap: dict[LabelCoarse, int] = field(default_factory=dict)


def auto_label(pool: ModelPool, unlabeled: Corpus, cfg: AutoLabelConfig) -> AutoLabelResult:
    """Label tweets on which at least k of the n pool models agree.

    Each retained class is then downsampled to the per-class cap, uniformly
    without replacement with the configured seed; the output keeps corpus
    order and carries provenance `auto`. Tweets where any pool member fails
    to predict are skipped and counted.
    """
    if len(pool) != cfg.pool_size:
        raise PoolError(f"pool has {len(pool)} models but config says n={cfg.pool_size}")

    retained: dict[LabelCoarse, list[tuple[int, Tweet]]] = {label: [] for label in COARSE_ORDER}
    votes_by_id: dict[str, dict[LabelCoarse, int]] = {}
    n_skipped = 0
    for pos, tweet in enumerate(unlabeled):
        try:
            argmaxes = [COARSE_ORDER[int(np.argmax(predict(h, tweet)))] for h in pool]
        except Exception as exc:  # noqa: BLE001 - member failure skips the tweet
            warnings.warn(f"skipping tweet {tweet.id!r}: pool member failed ({exc})", stacklevel=2)
            n_skipped += 1
            continue
        votes = count_votes(argmaxes)
        label = retained_label(votes, cfg.agreement_threshold)
        if label is not None:
            retained[label].append((pos, tweet))
            votes_by_id[tweet.id] = votes

    rng = np.random.default_rng(cfg.seed)
    chosen: list[tuple[int, LabeledExample]] = []
    before_cap = {label: len(retained[label]) for label in COARSE_ORDER}
    for label in COARSE_ORDER:
        candidates = retained[label]
        if len(candidates) > cfg.per_class_cap:
            keep = rng.choice(len(candidates), size=cfg.per_class_cap, replace=False)
            candidates = [candidates[i] for i in sorted(keep)]
        for pos, tweet in candidates:
            chosen.append((pos, LabeledExample(tweet=tweet, label=label, provenance=Provenance.AUTO)))

    chosen.sort(key=lambda item: item[0])  # corpus order
    dataset = LabeledDataset.from_examples(ex for _, ex in chosen)
    kept_ids = {ex.id for ex in dataset}
    return AutoLabelResult(
        dataset=dataset,
        votes={tid: v for tid, v in votes_by_id.items() if tid in kept_ids},
        n_considered=len(unlabeled),
        n_skipped=n_skipped,
        n_retained_before_cap=before_cap,
    )


def ensemble_predict(pool: ModelPool | Sequence[ClassifierHandle], tweet: Tweet) -> LabelCoarse:
    """Majority vote over the pool's argmax labels.

    Vote ties are broken by the summed predicted probability over the tied
    labels, then by fixed class order S < A < O. Members that fail to predict
    are excluded with a warning; it is an error only if every member fails.
    """
    handles = list(pool)
    if not handles:
        raise PoolError("ensemble needs at least one model")

    probs: list[np.ndarray] = []
    for handle in handles:
        try:
            probs.append(predict(handle, tweet))
        except Exception as exc:  # noqa: BLE001 - failed member drops out of the vote
            name = getattr(handle, "id", repr(handle))
            warnings.warn(f"ensemble member {name} failed on {tweet.id!r}: {exc}", stacklevel=2)
    if not probs:
        raise PoolError(f"all ensemble members failed on tweet {tweet.id!r}")

    stacked = np.vstack(probs)
    argmaxes = [COARSE_ORDER[int(i)] for i in np.argmax(stacked, axis=1)]
    votes = count_votes(argmaxes)
    top = max(votes.values())
    leaders = [label for label in COARSE_ORDER if votes[label] == top]
    if len(leaders) == 1:
        return leaders[0]

    sums = stacked.sum(axis=0)
    best = max(leaders, key=lambda label: (sums[label.index], -label.index))
    return best


# --- auto-label JSONL interface ----------------------------------------------
#
# One object per retained tweet:
# {"id", "label" in {"S","A","O"}, "votes": {"S": int, "A": int, "O": int},
#  "provenance": "auto"}.


def write_autolabel_jsonl(result: AutoLabelResult, out: IO) -> None:
    for ex in result.dataset:
        votes = result.votes.get(ex.id, {})
        json.dump(
            {
                "id": ex.id,
                "label": ex.label.value,
                "votes": {label.value: votes.get(label, 0) for label in COARSE_ORDER},
                "provenance": Provenance.AUTO.value,
            },
            out,
            ensure_ascii=False,
        )
        out.write("\n")


def read_autolabel_jsonl(stream: IO) -> dict[str, LabelCoarse]:
    labels: dict[str, LabelCoarse] = {}
    for line in stream:
        if not line.strip():
            continue
        obj = json.loads(line)
        labels[obj["id"]] = LabelCoarse(obj["label"])
    return labels
