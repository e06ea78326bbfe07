import io
import json
from datetime import datetime, timezone

import numpy as np
import pytest
from helpers import cooccurrence_oracle, make_tweet

from solidarity.corpus import (
    Corpus,
    CorpusError,
    expand_hashtags,
    extract_hashtags,
    filter_by_hashtags,
    parse_corpus,
    parse_corpus_lenient,
    parse_timestamp,
    write_corpus,
    write_hashtag_report,
)


def jsonl(*objs) -> str:
    return "".join(json.dumps(o, ensure_ascii=False) + "\n" for o in objs)


def valid_line(tweet_id="1", text="hello", lang="en", created_at="2020-03-01T12:00:00Z", **extra):
    obj = {"id": tweet_id, "text": text, "lang": lang, "created_at": created_at}
    obj.update(extra)
    return obj


class TestExtractHashtags:
    def test_no_tags(self):
        assert extract_hashtags("no tags here") == []

    def test_dedup_and_lowering(self):
        assert extract_hashtags("Go #RefugeesWelcome! #EU #refugeeswelcome") == [
            "refugeeswelcome",
            "eu",
        ]

    def test_unicode_letters(self):
        # hand-checked against the reference scan: umlauts are tag characters,
        # punctuation terminates
        assert extract_hashtags("#Flüchtlinge, #wirschaffendas.") == ["flüchtlinge", "wirschaffendas"]

    def test_digits_and_underscore(self):
        assert extract_hashtags("#niewieder2015 #open_borders") == ["niewieder2015", "open_borders"]

    def test_case_invariance(self):
        rng = np.random.default_rng(5)
        words = ["Hello", "#RefugeesWelcome", "#Flüchtlinge", "world", "#EU2020", "#a_b"]
        for _ in range(100):
            text = " ".join(words[i] for i in rng.integers(0, len(words), 8))
            assert extract_hashtags(text.upper()) == extract_hashtags(text.lower())


class TestParseCorpus:
    def test_empty_stream(self):
        assert len(parse_corpus(io.StringIO(""))) == 0

    def test_single_valid_line(self):
        corpus = parse_corpus(jsonl(valid_line(text="Helft jetzt! #LeaveNoOneBehind", lang="de")))
        assert len(corpus) == 1
        assert corpus[0].hashtags == ("leavenoonebehind",)
        assert corpus[0].created_at.tzinfo is not None

    def test_duplicate_id_names_line(self):
        stream = jsonl(valid_line("42"), valid_line("42"))
        with pytest.raises(CorpusError, match="line 2.*duplicate id"):
            parse_corpus(stream)

    def test_malformed_json_names_line(self):
        stream = jsonl(valid_line("1")) + "{oops\n"
        with pytest.raises(CorpusError, match="line 2"):
            parse_corpus(stream)

    def test_missing_and_empty_fields(self):
        with pytest.raises(CorpusError, match="missing or empty field 'text'"):
            parse_corpus(jsonl({"id": "1", "lang": "en", "created_at": "2020-01-01T00:00:00Z"}))
        with pytest.raises(CorpusError, match="missing or empty field 'id'"):
            parse_corpus(jsonl(valid_line(tweet_id="")))

    def test_unsupported_lang(self):
        with pytest.raises(CorpusError, match="unsupported lang"):
            parse_corpus(jsonl(valid_line(lang="fr")))

    def test_bad_timestamp(self):
        with pytest.raises(CorpusError, match="bad created_at"):
            parse_corpus(jsonl(valid_line(created_at="not-a-date")))

    def test_validity_window(self):
        window = (
            datetime(2020, 1, 1, tzinfo=timezone.utc),
            datetime(2020, 12, 31, tzinfo=timezone.utc),
        )
        parse_corpus(jsonl(valid_line()), window=window)
        with pytest.raises(CorpusError, match="outside validity window"):
            parse_corpus(jsonl(valid_line(created_at="2021-06-01T00:00:00Z")), window=window)

    def test_lenient_skips_and_counts(self):
        stream = jsonl(valid_line("1")) + "{oops\n" + jsonl(valid_line("2"), valid_line("2"))
        corpus, report = parse_corpus_lenient(stream)
        assert len(corpus) == 2
        assert report.n_parsed == 2
        assert report.n_skipped == 2
        assert [line for line, _ in report.skipped] == [2, 4]

    def test_order_preserved(self):
        corpus = parse_corpus(jsonl(valid_line("b"), valid_line("a"), valid_line("c")))
        assert [t.id for t in corpus] == ["b", "a", "c"]
        assert corpus.index == {"b": 0, "a": 1, "c": 2}

    def test_naive_timestamp_taken_as_utc(self):
        corpus = parse_corpus(jsonl(valid_line(created_at="2020-03-01T12:00:00")))
        assert corpus[0].created_at == datetime(2020, 3, 1, 12, tzinfo=timezone.utc)

    def test_offset_timestamp_normalized(self):
        corpus = parse_corpus(jsonl(valid_line(created_at="2020-03-01T14:00:00+02:00")))
        assert corpus[0].created_at == datetime(2020, 3, 1, 12, tzinfo=timezone.utc)


def test_round_trip_parse_serialize_parse(fixture_dir):
    with open(fixture_dir / "tweets.jsonl", encoding="utf-8") as f:
        corpus = parse_corpus(f)
    buf = io.StringIO()
    write_corpus(corpus, buf)
    corpus2 = parse_corpus(buf.getvalue())
    assert corpus == corpus2


class TestExpandHashtags:
    def _corpus(self, tag_sets):
        return Corpus.from_tweets(
            make_tweet(f"t{i}", " ".join(f"#{t}" for t in tags)) for i, tags in enumerate(tag_sets)
        )

    def test_no_seed_occurrence(self):
        corpus = self._corpus([{"x", "y"}, {"z"}])
        assert expand_hashtags(corpus, {"a"}, 1) == []

    def test_three_tweet_example(self):
        corpus = self._corpus([{"a", "b"}, {"a", "b"}, {"a", "c"}])
        assert expand_hashtags(corpus, {"a"}, 2) == [("b", 2)]

    def test_matches_pair_counting_oracle(self):
        rng = np.random.default_rng(17)
        tags = [f"tag{i}" for i in range(8)]
        for _ in range(30):
            tag_sets = [
                {tags[i] for i in rng.integers(0, len(tags), rng.integers(1, 4))}
                for _ in range(rng.integers(1, 20))
            ]
            corpus = self._corpus(tag_sets)
            seeds = {tags[0], tags[1]}
            threshold = int(rng.integers(1, 4))
            assert expand_hashtags(corpus, seeds, threshold) == cooccurrence_oracle(
                corpus, seeds, threshold
            )

    def test_threshold_monotonicity(self):
        corpus = self._corpus([{"a", "b"}, {"a", "b"}, {"a", "c"}, {"a", "c"}, {"a", "d"}])
        for t1, t2 in [(1, 2), (1, 3), (2, 3)]:
            low = dict(expand_hashtags(corpus, {"a"}, t1))
            high = dict(expand_hashtags(corpus, {"a"}, t2))
            assert set(high) <= set(low)

    def test_sorted_by_count_then_name(self):
        corpus = self._corpus([{"a", "z"}, {"a", "z"}, {"a", "b"}, {"a", "b"}, {"a", "m"}])
        assert expand_hashtags(corpus, {"a"}, 1) == [("b", 2), ("z", 2), ("m", 1)]

    def test_seed_normalization(self):
        corpus = self._corpus([{"a", "b"}])
        assert expand_hashtags(corpus, {"#A"}, 1) == [("b", 1)]

    def test_empty_seeds_error(self):
        with pytest.raises(CorpusError, match="seed set"):
            expand_hashtags(self._corpus([{"a"}]), set(), 1)


class TestFilterByHashtags:
    def test_keep_all(self):
        corpus = Corpus.from_tweets(
            [make_tweet("1", "#a x"), make_tweet("2", "#b y"), make_tweet("3", "#a #b")]
        )
        assert filter_by_hashtags(corpus, {"a", "b"}) == corpus

    def test_keep_none(self):
        corpus = Corpus.from_tweets([make_tweet("1", "#a")])
        assert len(filter_by_hashtags(corpus, set())) == 0

    def test_five_tweet_example(self):
        corpus = Corpus.from_tweets(
            [
                make_tweet("1", "save the euro #eurobonds"),
                make_tweet("2", "nothing here"),
                make_tweet("3", "#refugees matter"),
                make_tweet("4", "more #Eurobonds talk"),
                make_tweet("5", "#eu only"),
            ]
        )
        kept = filter_by_hashtags(corpus, {"eurobonds"})
        assert [t.id for t in kept] == ["1", "4"]

    def test_idempotent(self):
        corpus = Corpus.from_tweets([make_tweet("1", "#a"), make_tweet("2", "#b")])
        once = filter_by_hashtags(corpus, {"a"})
        assert filter_by_hashtags(once, {"a"}) == once


def test_hashtag_report_csv():
    buf = io.StringIO()
    write_hashtag_report([("b", 2), ("a", 1)], buf)
    assert buf.getvalue().splitlines() == ["hashtag,count", "b,2", "a,1"]


def test_parse_timestamp_second_precision():
    dt = parse_timestamp("2020-03-01T12:00:00.789Z")
    assert dt.microsecond == 0
