"""Shared test utilities: tweet builders and independent brute-force oracles.

The oracles re-derive expected values from first principles and must never
call into the implementation paths they check.
"""

from __future__ import annotations

from collections import Counter
from datetime import datetime, timedelta, timezone

import numpy as np

from solidarity.annotation import LabelCoarse, LabelFine
from solidarity.augment import LabeledDataset, LabeledExample, Provenance
from solidarity.corpus import Tweet

UTC = timezone.utc


def make_tweet(tweet_id="t1", text="hello world", lang="en", created_at=None) -> Tweet:
    if created_at is None:
        created_at = datetime(2020, 3, 1, 12, 0, 0, tzinfo=UTC)
    return Tweet.create(id=tweet_id, text=text, lang=lang, created_at=created_at)


def make_dataset(labels, provenances=None, base_time=None) -> LabeledDataset:
    """Dataset of trivially distinct tweets with the given label sequence."""
    if provenances is None:
        provenances = [Provenance.EXPERT] * len(labels)
    base = base_time or datetime(2020, 3, 1, tzinfo=UTC)
    examples = [
        LabeledExample(
            tweet=make_tweet(f"d{i}", f"text {i}", created_at=base + timedelta(minutes=i)),
            label=label,
            provenance=prov,
        )
        for i, (label, prov) in enumerate(zip(labels, provenances))
    ]
    return LabeledDataset.from_examples(examples)


# --- kappa oracle -------------------------------------------------------------


def kappa_oracle(a, b) -> float:
    """Direct evaluation of the kappa formula on the contingency table."""
    n = len(a)
    p_o = sum(1 for x, y in zip(a, b) if x == y) / n
    ca, cb = Counter(a), Counter(b)
    p_e = sum(ca[k] * cb[k] for k in set(ca) | set(cb)) / n**2
    if p_e == 1.0:
        return 1.0
    return (p_o - p_e) / (1 - p_e)


# --- spearman oracle ------------------------------------------------------------


def average_ranks(values) -> list[float]:
    """Explicit rank table with average ranks for ties."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j) / 2 + 1  # 1-based
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


def spearman_oracle(xs, ys) -> float:
    """Brute force: rank both series (average ranks), then Pearson."""
    rx = np.array(average_ranks(list(xs)))
    ry = np.array(average_ranks(list(ys)))
    rx -= rx.mean()
    ry -= ry.mean()
    return float((rx @ ry) / np.sqrt((rx @ rx) * (ry @ ry)))


# --- crowd-aggregation oracle ---------------------------------------------------


def aggregate_oracle(labels, annotator_ids, reliabilities) -> LabelFine:
    """Exhaustive restatement of the tie-break chain: unique majority, then
    most reliable voter among tied-top labels, then lexicographic id."""
    counts = Counter(labels)
    best_count = max(counts.values())
    leaders = [l for l in counts if counts[l] == best_count]
    if len(leaders) == 1:
        return leaders[0]

    candidates = [
        (label, annotator)
        for label, annotator in zip(labels, annotator_ids)
        if label in leaders
    ]
    defined = [(label, who) for label, who in candidates if reliabilities.get(who) is not None]
    if defined:
        top_rel = max(reliabilities[who] for _, who in defined)
        finalists = [(label, who) for label, who in defined if reliabilities[who] == top_rel]
    else:
        finalists = candidates
    return min(finalists, key=lambda pair: pair[1])[0]


# --- vote-retention oracle ------------------------------------------------------


def retention_oracle(votes: dict[LabelCoarse, int], k: int) -> LabelCoarse | None:
    """Brute-force vote counting: unique top label with at least k votes."""
    best = max(votes.values())
    if best < k:
        return None
    leaders = [label for label, v in votes.items() if v == best]
    return leaders[0] if len(leaders) == 1 else None


# --- hashtag co-occurrence oracle -------------------------------------------------


def cooccurrence_oracle(corpus, seeds: set[str], threshold: int) -> list[tuple[str, int]]:
    counts: dict[str, int] = {}
    for tweet in corpus:
        tags = set(tweet.hashtags)
        if tags & seeds:
            for tag in tags:
                if tag not in seeds:
                    counts[tag] = counts.get(tag, 0) + 1
    out = [(t, c) for t, c in counts.items() if c >= threshold]
    return sorted(out, key=lambda tc: (-tc[1], tc[0]))
