"""Tweet corpus ingestion: JSONL parsing and validation, hashtag extraction,
seed-set expansion via co-occurrence counts, and hashtag filtering.

A corpus is immutable after parsing and safe to share across threads for
read-only use.
"""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import IO, Iterable, Iterator

SUPPORTED_LANGS = ("en", "de")

# One or more unicode letters, digits or underscore after '#'; anything else
# terminates the tag. \w covers umlauts etc. at the default unicode setting.
_HASHTAG_RE = re.compile(r"#(\w+)")


class CorpusError(ValueError):
    """Fatal corpus problem; carries the 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def extract_hashtags(text: str) -> list[str]:
    """Hashtags in `text`, lowercased, '#' stripped, deduplicated preserving
    first occurrence."""
    seen: dict[str, None] = {}
    for match in _HASHTAG_RE.finditer(text):
        tag = match.group(1).lower()
        if tag not in seen:
            seen[tag] = None
    return list(seen)


def parse_timestamp(raw: str) -> datetime:
    """Parse an ISO-8601 timestamp to an aware UTC datetime at second
    precision. Naive timestamps are taken as UTC."""
    value = raw.strip()
    if value.endswith(("Z", "z")):
        value = value[:-1] + "+00:00"
    dt = datetime.fromisoformat(value)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc).replace(microsecond=0)


def format_timestamp(dt: datetime) -> str:
    return dt.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass(frozen=True)
class Tweet:
    """One post. `hashtags` is derived from `text` at construction and every
    element occurs literally (case-insensitively, with '#') in the text."""

    id: str
    text: str
    lang: str
    created_at: datetime
    hashtags: tuple[str, ...] = field(default=())

    @classmethod
    def create(cls, id: str, text: str, lang: str, created_at: datetime | str) -> "Tweet":
        if isinstance(created_at, str):
            created_at = parse_timestamp(created_at)
        return cls(
            id=id,
            text=text,
            lang=lang,
            created_at=created_at.astimezone(timezone.utc).replace(microsecond=0),
            hashtags=tuple(extract_hashtags(text)),
        )


@dataclass(frozen=True)
class Corpus:
    """Ordered tweet collection with an id index; iteration order is input
    order."""

    tweets: tuple[Tweet, ...]
    index: dict[str, int] = field(repr=False)

    @classmethod
    def from_tweets(cls, tweets: Iterable[Tweet]) -> "Corpus":
        tweets = tuple(tweets)
        index: dict[str, int] = {}
        for pos, tweet in enumerate(tweets):
            if tweet.id in index:
                raise CorpusError(f"duplicate tweet id {tweet.id!r}")
            index[tweet.id] = pos
        return cls(tweets=tweets, index=index)

    def __len__(self) -> int:
        return len(self.tweets)

    def __iter__(self) -> Iterator[Tweet]:
        return iter(self.tweets)

    def __getitem__(self, pos: int) -> Tweet:
        return self.tweets[pos]

    def __contains__(self, tweet_id: str) -> bool:
        return tweet_id in self.index

    def get(self, tweet_id: str) -> Tweet:
        return self.tweets[self.index[tweet_id]]

    def all_hashtags(self) -> set[str]:
        return {tag for tweet in self.tweets for tag in tweet.hashtags}


@dataclass
class ParseReport:
    """Bookkeeping for a lenient parse: how many lines were read, kept, and
    skipped (with reasons)."""

    n_lines: int = 0
    n_parsed: int = 0
    skipped: list[tuple[int, str]] = field(default_factory=list)

    @property
    def n_skipped(self) -> int:
        return len(self.skipped)


_REQUIRED_FIELDS = ("id", "text", "lang", "created_at")


def _parse_line(
    lineno: int,
    line: str,
    seen_ids: set[str],
    window: tuple[datetime, datetime] | None,
) -> Tweet:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise CorpusError(f"malformed JSON ({exc.msg})", line=lineno) from exc
    if not isinstance(obj, dict):
        raise CorpusError("line is not a JSON object", line=lineno)

    for key in _REQUIRED_FIELDS:
        if key not in obj or obj[key] in (None, ""):
            raise CorpusError(f"missing or empty field {key!r}", line=lineno)

    if obj["lang"] not in SUPPORTED_LANGS:
        raise CorpusError(f"unsupported lang {obj['lang']!r}", line=lineno)
    if not isinstance(obj["id"], str) or not isinstance(obj["text"], str):
        raise CorpusError("id and text must be strings", line=lineno)
    if obj["id"] in seen_ids:
        raise CorpusError(f"duplicate id {obj['id']!r}", line=lineno)

    try:
        created_at = parse_timestamp(obj["created_at"])
    except ValueError as exc:
        raise CorpusError(f"bad created_at {obj['created_at']!r}", line=lineno) from exc
    if window is not None and not (window[0] <= created_at <= window[1]):
        raise CorpusError(
            f"created_at {format_timestamp(created_at)} outside validity window", line=lineno
        )

    return Tweet.create(id=obj["id"], text=obj["text"], lang=obj["lang"], created_at=created_at)


def _iter_lines(stream) -> Iterator[str]:
    if isinstance(stream, (str, bytes)):
        stream = io.StringIO(stream.decode("utf-8") if isinstance(stream, bytes) else stream)
    for line in stream:
        if isinstance(line, bytes):
            line = line.decode("utf-8")
        yield line


def parse_corpus(
    stream: IO | str | bytes,
    window: tuple[datetime, datetime] | None = None,
) -> Corpus:
    """Strict JSONL parse: any malformed line, missing field, duplicate id or
    unsupported language aborts with the offending line number."""
    tweets: list[Tweet] = []
    seen: set[str] = set()
    for lineno, line in enumerate(_iter_lines(stream), start=1):
        if not line.strip():
            continue
        tweet = _parse_line(lineno, line, seen, window)
        seen.add(tweet.id)
        tweets.append(tweet)
    return Corpus.from_tweets(tweets)


def parse_corpus_lenient(
    stream: IO | str | bytes,
    window: tuple[datetime, datetime] | None = None,
) -> tuple[Corpus, ParseReport]:
    """Lenient JSONL parse: bad lines are skipped and counted in the report
    instead of aborting."""
    report = ParseReport()
    tweets: list[Tweet] = []
    seen: set[str] = set()
    for lineno, line in enumerate(_iter_lines(stream), start=1):
        if not line.strip():
            continue
        report.n_lines += 1
        try:
            tweet = _parse_line(lineno, line, seen, window)
        except CorpusError as exc:
            report.skipped.append((lineno, str(exc)))
            continue
        seen.add(tweet.id)
        tweets.append(tweet)
        report.n_parsed += 1
    return Corpus.from_tweets(tweets), report


def write_corpus(corpus: Corpus, out: IO) -> None:
    """Serialize to the ingestion JSONL format (id, text, lang, created_at)."""
    for tweet in corpus:
        json.dump(
            {
                "id": tweet.id,
                "text": tweet.text,
                "lang": tweet.lang,
                "created_at": format_timestamp(tweet.created_at),
            },
            out,
            ensure_ascii=False,
        )
        out.write("\n")


def expand_hashtags(
    corpus: Corpus,
    seeds: set[str],
    min_cooccurrence: int = 1,
) -> list[tuple[str, int]]:
    """Candidate hashtags co-occurring with the seed set.

    A non-seed hashtag is counted once per tweet that contains it together
    with at least one seed. Candidates with count >= `min_cooccurrence` are
    returned sorted by count descending, ties lexicographic.
    """
    if not seeds:
        raise CorpusError("seed set must be non-empty")
    if min_cooccurrence < 1:
        raise CorpusError(f"min_cooccurrence must be >= 1, got {min_cooccurrence}")
    seeds = {s.lstrip("#").lower() for s in seeds}

    counts: dict[str, int] = {}
    for tweet in corpus:
        tags = set(tweet.hashtags)
        if not tags & seeds:
            continue
        for tag in tags - seeds:
            counts[tag] = counts.get(tag, 0) + 1

    ranked = [(tag, c) for tag, c in counts.items() if c >= min_cooccurrence]
    ranked.sort(key=lambda tc: (-tc[1], tc[0]))
    return ranked


def filter_by_hashtags(corpus: Corpus, keep: set[str]) -> Corpus:
    """Sub-corpus of tweets whose hashtag list intersects `keep`; order is
    preserved."""
    keep = {t.lstrip("#").lower() for t in keep}
    return Corpus.from_tweets(t for t in corpus if set(t.hashtags) & keep)


def write_hashtag_report(ranked: list[tuple[str, int]], out: IO) -> None:
    """CSV report (hashtag,count) for expand_hashtags output."""
    w = csv.writer(out)
    w.writerow(["hashtag", "count"])
    for tag, count in ranked:
        w.writerow([tag, count])
