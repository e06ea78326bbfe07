"""Training-set augmentation: minority-class oversampling and back-translation
through a pluggable translator, plus the labeled-dataset container they
operate on.
"""

from __future__ import annotations

import json
import os
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import IO, Iterable, Protocol

import numpy as np
import requests

from .annotation import COARSE_ORDER, LabelCoarse
from .corpus import Corpus, Tweet, format_timestamp


class Provenance(str, Enum):
    EXPERT = "expert"
    CROWD = "crowd"
    AUTO = "auto"
    OVERSAMPLE = "oversample"
    BACKTRANSLATION = "backtranslation"


HUMAN_PROVENANCE = (Provenance.EXPERT, Provenance.CROWD)


@dataclass(frozen=True)
class LabeledExample:
    """A tweet with its coarse label and where the label came from. Copies
    made by augmentation keep the source id plus a suffix, so ids stay unique
    and traceable."""

    tweet: Tweet
    label: LabelCoarse
    provenance: Provenance

    @property
    def id(self) -> str:
        return self.tweet.id


@dataclass(frozen=True)
class LabeledDataset:
    """Ordered collection of labeled examples with per-class counts."""

    examples: tuple[LabeledExample, ...]
    class_counts: dict[LabelCoarse, int] = field(repr=False)

    @classmethod
    def from_examples(cls, examples: Iterable[LabeledExample]) -> "LabeledDataset":
        examples = tuple(examples)
        counts = {label: 0 for label in COARSE_ORDER}
        for ex in examples:
            counts[ex.label] += 1
        return cls(examples=examples, class_counts=counts)

    @classmethod
    def from_corpus(
        cls,
        corpus: Corpus,
        assignments: dict[str, tuple[LabelCoarse, Provenance]],
    ) -> "LabeledDataset":
        """Join a corpus with per-id (label, provenance) assignments, keeping
        corpus order."""
        return cls.from_examples(
            LabeledExample(tweet=t, label=assignments[t.id][0], provenance=assignments[t.id][1])
            for t in corpus
            if t.id in assignments
        )

    def __len__(self) -> int:
        return len(self.examples)

    def __iter__(self):
        return iter(self.examples)

    def __getitem__(self, pos: int) -> LabeledExample:
        return self.examples[pos]

    def by_class(self) -> dict[LabelCoarse, list[LabeledExample]]:
        groups: dict[LabelCoarse, list[LabeledExample]] = {l: [] for l in COARSE_ORDER}
        for ex in self.examples:
            groups[ex.label].append(ex)
        return groups


class AugmentError(ValueError):
    pass


def oversample(dataset: LabeledDataset, seed: int) -> LabeledDataset:
    """Duplicate minority-class examples until all classes match the majority
    count. Duplicates are uniform-with-replacement draws (seeded), appended
    after the originals in fixed class order; texts and labels are untouched.
    """
    counts = dataset.class_counts
    empty = [l.value for l in COARSE_ORDER if counts[l] == 0]
    if empty:
        raise AugmentError(f"cannot oversample with empty classes: {empty}")

    target = max(counts.values())
    rng = np.random.default_rng(seed)
    groups = dataset.by_class()

    extras: list[LabeledExample] = []
    copy_counter: dict[str, int] = {}
    for label in COARSE_ORDER:
        pool = groups[label]
        deficit = target - len(pool)
        if deficit == 0:
            continue
        picks = rng.integers(0, len(pool), size=deficit)
        for pick in picks:
            src = pool[int(pick)]
            n = copy_counter.get(src.id, 0) + 1
            copy_counter[src.id] = n
            dup_tweet = Tweet(
                id=f"{src.id}~os{n}",
                text=src.tweet.text,
                lang=src.tweet.lang,
                created_at=src.tweet.created_at,
                hashtags=src.tweet.hashtags,
            )
            extras.append(LabeledExample(tweet=dup_tweet, label=src.label, provenance=Provenance.OVERSAMPLE))

    return LabeledDataset.from_examples(dataset.examples + tuple(extras))


class Translator(Protocol):
    """Anything that can translate text between two language codes. A fixed
    implementation must be deterministic for a fixed input."""

    def translate(self, text: str, source: str, target: str) -> str: ...


class IdentityTranslator:
    def translate(self, text: str, source: str, target: str) -> str:
        return text


class MockTranslator:
    """Deterministic stand-in for a translation service: reverses word order
    and appends a direction marker. Ships in-repo so augmentation tests never
    need the network."""

    def translate(self, text: str, source: str, target: str) -> str:
        return " ".join(reversed(text.split())) + f" [{source}>{target}]"


class RemoteTranslator:
    """Thin HTTP client for a remote translation service.

    Wire format: POST `base_url` with JSON {"q": text, "source": lang,
    "target": lang}; the response is JSON {"text": string}. The API key is
    read from the environment (default variable TRANSLATOR_API_KEY) and sent
    as a bearer token. Failed requests are retried with exponential backoff,
    and calls are rate-limited to `min_interval` seconds apart.
    """

    def __init__(
        self,
        base_url: str,
        api_key_var: str = "TRANSLATOR_API_KEY",
        max_retries: int = 3,
        backoff: float = 0.5,
        min_interval: float = 0.0,
        timeout: float = 10.0,
        session: requests.Session | None = None,
    ):
        self.base_url = base_url
        self.api_key = os.environ.get(api_key_var)
        self.max_retries = max_retries
        self.backoff = backoff
        self.min_interval = min_interval
        self.timeout = timeout
        self.session = session or requests.Session()
        self._last_call = 0.0

    def translate(self, text: str, source: str, target: str) -> str:
        headers = {}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        payload = {"q": text, "source": source, "target": target}

        last_exc: Exception | None = None
        for attempt in range(self.max_retries + 1):
            wait = self.min_interval - (time.monotonic() - self._last_call)
            if wait > 0:
                time.sleep(wait)
            self._last_call = time.monotonic()
            try:
                resp = self.session.post(self.base_url, json=payload, headers=headers, timeout=self.timeout)
                resp.raise_for_status()
                return resp.json()["text"]
            except (requests.RequestException, KeyError, ValueError) as exc:
                last_exc = exc
                if attempt < self.max_retries:
                    time.sleep(self.backoff * (2**attempt))
        raise AugmentError(f"translation failed after {self.max_retries + 1} attempts: {last_exc}")


def _round_trip(translator: Translator, text: str, source: str, pivot: str) -> str:
    # A tweet already in the pivot language pivots through English (or German
    # when the source is English), keeping the round trip symmetric.
    via = pivot if source != pivot else ("en" if source != "en" else "de")
    return translator.translate(translator.translate(text, source, via), via, source)


def back_translate(
    dataset: LabeledDataset,
    translator: Translator,
    pivot: str = "de",
    drop_identical: bool = False,
    max_workers: int = 1,
) -> LabeledDataset:
    """Append one round-tripped copy of every human-labeled example.

    Copies keep label, language and timestamp; their text is translated
    source -> pivot -> source and their provenance is `backtranslation`.
    Translator failures skip the item with a warning. With the default
    `drop_identical=False` the size identity |output| = |input| + number of
    human-labeled examples holds exactly (identity translators included).
    """
    sources = [ex for ex in dataset.examples if ex.provenance in HUMAN_PROVENANCE]

    def worker(ex: LabeledExample) -> str | Exception:
        try:
            return _round_trip(translator, ex.tweet.text, ex.tweet.lang, pivot)
        except Exception as exc:  # noqa: BLE001 - any translator failure skips the item
            return exc

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(worker, sources))  # map preserves input order
    else:
        results = [worker(ex) for ex in sources]

    extras: list[LabeledExample] = []
    n_failed = 0
    for ex, result in zip(sources, results):
        if isinstance(result, Exception):
            n_failed += 1
            continue
        if drop_identical and result == ex.tweet.text:
            continue
        extras.append(
            LabeledExample(
                tweet=Tweet.create(
                    id=f"{ex.id}~bt",
                    text=result,
                    lang=ex.tweet.lang,
                    created_at=ex.tweet.created_at,
                ),
                label=ex.label,
                provenance=Provenance.BACKTRANSLATION,
            )
        )
    if n_failed:
        warnings.warn(f"back-translation skipped {n_failed} items after translator failures", stacklevel=2)

    return LabeledDataset.from_examples(dataset.examples + tuple(extras))


# --- labeled-dataset JSONL --------------------------------------------------
#
# One object per line: {"id", "text", "lang", "created_at", "label", "provenance"}.


def write_dataset(dataset: LabeledDataset, out: IO) -> None:
    for ex in dataset:
        json.dump(
            {
                "id": ex.tweet.id,
                "text": ex.tweet.text,
                "lang": ex.tweet.lang,
                "created_at": format_timestamp(ex.tweet.created_at),
                "label": ex.label.value,
                "provenance": ex.provenance.value,
            },
            out,
            ensure_ascii=False,
        )
        out.write("\n")


def read_dataset(stream: IO) -> LabeledDataset:
    examples = []
    for lineno, line in enumerate(stream, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            examples.append(
                LabeledExample(
                    tweet=Tweet.create(
                        id=obj["id"], text=obj["text"], lang=obj["lang"], created_at=obj["created_at"]
                    ),
                    label=LabelCoarse(obj["label"]),
                    provenance=Provenance(obj["provenance"]),
                )
            )
        except (KeyError, ValueError) as exc:
            raise AugmentError(f"line {lineno}: bad dataset record: {exc}") from exc
    return LabeledDataset.from_examples(examples)
