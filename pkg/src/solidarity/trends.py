"""Temporal analytics over labeled tweets: per-day label counts, the S/A
ratio, weekly averages, and Spearman rank correlation against external series
such as infection counts.

Days are UTC calendar dates throughout; missing days stay absent rather than
being zero-filled.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from datetime import date, timedelta, timezone
from typing import IO, Iterable, Mapping

from scipy import stats as scipy_stats

from .annotation import COARSE_ORDER, LabelCoarse
from .augment import LabeledExample


class TrendsError(ValueError):
    pass


@dataclass(frozen=True)
class DailySeries:
    """Per-day label counts, keyed by strictly increasing UTC dates."""

    entries: dict[date, dict[LabelCoarse, int]]

    @classmethod
    def from_entries(cls, entries: Mapping[date, Mapping[LabelCoarse, int]]) -> "DailySeries":
        ordered: dict[date, dict[LabelCoarse, int]] = {}
        for day in sorted(entries):
            counts = {label: int(entries[day].get(label, 0)) for label in COARSE_ORDER}
            if any(c < 0 for c in counts.values()):
                raise TrendsError(f"negative count on {day}")
            ordered[day] = counts
        return cls(entries=ordered)

    def __len__(self) -> int:
        return len(self.entries)

    def dates(self) -> list[date]:
        return list(self.entries)

    def counts_for(self, label: LabelCoarse) -> dict[date, int]:
        return {day: counts[label] for day, counts in self.entries.items()}

    def total(self, label: LabelCoarse) -> int:
        return sum(counts[label] for counts in self.entries.values())


def daily_counts(labeled: Iterable[LabeledExample]) -> DailySeries:
    """Bucket labeled tweets by UTC calendar date."""
    entries: dict[date, dict[LabelCoarse, int]] = {}
    for ex in labeled:
        day = ex.tweet.created_at.astimezone(timezone.utc).date()
        counts = entries.setdefault(day, {label: 0 for label in COARSE_ORDER})
        counts[ex.label] += 1
    return DailySeries.from_entries(entries)


@dataclass(frozen=True)
class RatioSeries:
    """Per-day S/A ratio; days with zero anti-solidarity tweets are undefined
    and kept apart so plots can drop them."""

    values: dict[date, float]
    undefined: tuple[date, ...]


def sa_ratio(series: DailySeries) -> RatioSeries:
    values: dict[date, float] = {}
    undefined: list[date] = []
    for day, counts in series.entries.items():
        if counts[LabelCoarse.A] > 0:
            values[day] = counts[LabelCoarse.S] / counts[LabelCoarse.A]
        else:
            undefined.append(day)
    return RatioSeries(values=values, undefined=tuple(undefined))


@dataclass(frozen=True)
class WeeklyAverage:
    """Per-ISO-week sums over a label subset and their overall mean. A week is
    flagged partial when the observed date span does not cover its full
    Monday-to-Sunday range."""

    weekly_sums: dict[tuple[int, int], int]
    partial_weeks: frozenset[tuple[int, int]]
    mean: float


def weekly_average(series: DailySeries, labels: Iterable[LabelCoarse] | None = None) -> WeeklyAverage:
    if len(series) == 0:
        raise TrendsError("cannot average an empty series")
    subset = tuple(labels) if labels is not None else COARSE_ORDER

    sums: dict[tuple[int, int], int] = {}
    for day, counts in series.entries.items():
        iso = day.isocalendar()
        key = (iso[0], iso[1])
        sums[key] = sums.get(key, 0) + sum(counts[label] for label in subset)

    first, last = min(series.entries), max(series.entries)
    partial: set[tuple[int, int]] = set()
    for key in sums:
        monday = date.fromisocalendar(key[0], key[1], 1)
        if monday < first or monday + timedelta(days=6) > last:
            partial.add(key)

    mean = sum(sums.values()) / len(sums)
    return WeeklyAverage(weekly_sums=sums, partial_weeks=frozenset(partial), mean=mean)


@dataclass(frozen=True)
class ExternalSeries:
    """External per-day real values (e.g. infection counts), strictly
    increasing dates."""

    values: dict[date, float]

    @classmethod
    def from_values(cls, values: Mapping[date, float]) -> "ExternalSeries":
        return cls(values={day: float(values[day]) for day in sorted(values)})


def read_external_csv(stream: IO) -> ExternalSeries:
    """Read a date,value CSV (ISO dates); a `date,value` header row is
    optional."""
    values: dict[date, float] = {}
    for row in csv.reader(stream):
        if not row or row[0].strip().lower() == "date":
            continue
        if len(row) < 2:
            raise TrendsError(f"bad external-series row: {row!r}")
        values[date.fromisoformat(row[0].strip())] = float(row[1])
    return ExternalSeries.from_values(values)


@dataclass(frozen=True)
class CorrelationResult:
    rho: float
    n: int
    method: str = "spearman"

    def to_dict(self) -> dict:
        return {"rho": self.rho, "n": self.n, "method": self.method}


def spearman(
    x: Mapping[date, float] | ExternalSeries,
    y: Mapping[date, float] | ExternalSeries,
    window: tuple[date, date] | None = None,
) -> CorrelationResult:
    """Spearman rank correlation on the dates both series share.

    Ranks use standard average-rank tie handling; the optional window
    restricts the inner join to [start, end]. Fewer than two overlapping days
    or a constant series is an error.
    """
    xv = x.values if isinstance(x, ExternalSeries) else x
    yv = y.values if isinstance(y, ExternalSeries) else y
    days = sorted(set(xv) & set(yv))
    if window is not None:
        days = [d for d in days if window[0] <= d <= window[1]]
    if len(days) < 2:
        raise TrendsError(f"need >= 2 overlapping days, got {len(days)}")

    xs = [float(xv[d]) for d in days]
    ys = [float(yv[d]) for d in days]
    if len(set(xs)) == 1 or len(set(ys)) == 1:
        raise TrendsError("rank correlation undefined for a constant series")

    rho = float(scipy_stats.spearmanr(xs, ys).statistic)
    return CorrelationResult(rho=rho, n=len(days))


def moving_average(values: Mapping[date, float], window: int = 7) -> dict[date, float]:
    """Centered moving average for plotting; days without a full window of
    defined neighbors are dropped."""
    if window < 1 or window % 2 == 0:
        raise TrendsError("window must be a positive odd number")
    half = window // 2
    out: dict[date, float] = {}
    for day in values:
        neighborhood = [values.get(day + timedelta(days=k)) for k in range(-half, half + 1)]
        if all(v is not None for v in neighborhood):
            out[day] = sum(neighborhood) / window
    return out


# --- CSV outputs --------------------------------------------------------------


def write_daily_csv(series: DailySeries, out: IO) -> None:
    w = csv.writer(out)
    w.writerow(["date"] + [label.value for label in COARSE_ORDER])
    for day, counts in series.entries.items():
        w.writerow([day.isoformat()] + [counts[label] for label in COARSE_ORDER])


def read_daily_csv(stream: IO) -> DailySeries:
    reader = csv.reader(stream)
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != ["date", "S", "A", "O"]:
        raise TrendsError(f"daily CSV must have header date,S,A,O, got {header!r}")
    entries: dict[date, dict[LabelCoarse, int]] = {}
    for row in reader:
        if not row:
            continue
        entries[date.fromisoformat(row[0])] = {
            label: int(row[i + 1]) for i, label in enumerate(COARSE_ORDER)
        }
    return DailySeries.from_entries(entries)


def write_ratio_csv(ratio: RatioSeries, out: IO, zero_as_missing: bool = True) -> None:
    w = csv.writer(out)
    w.writerow(["date", "sa_ratio"])
    days = sorted(set(ratio.values) | (set() if zero_as_missing else set(ratio.undefined)))
    for day in days:
        if day in ratio.values:
            w.writerow([day.isoformat(), f"{ratio.values[day]:.6f}"])
        else:
            w.writerow([day.isoformat(), ""])


def write_long_csv(series: DailySeries, ratio: RatioSeries | None, out: IO) -> None:
    """Plot-ready long format: date,metric,value."""
    w = csv.writer(out)
    w.writerow(["date", "metric", "value"])
    for day, counts in series.entries.items():
        for label in COARSE_ORDER:
            w.writerow([day.isoformat(), label.value, counts[label]])
    if ratio is not None:
        for day, value in ratio.values.items():
            w.writerow([day.isoformat(), "sa_ratio", f"{value:.6f}"])
