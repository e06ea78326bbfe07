import http.server
import json
import threading
import time
from collections import Counter

import pytest
from helpers import make_dataset, make_tweet

from solidarity.annotation import LabelCoarse
from solidarity.augment import (
    AugmentError,
    IdentityTranslator,
    LabeledDataset,
    LabeledExample,
    MockTranslator,
    Provenance,
    RemoteTranslator,
    back_translate,
    oversample,
    read_dataset,
    write_dataset,
)

S, A, O = LabelCoarse.S, LabelCoarse.A, LabelCoarse.O


def dataset_with_counts(n_s, n_a, n_o, provenance=Provenance.CROWD) -> LabeledDataset:
    labels = [S] * n_s + [A] * n_a + [O] * n_o
    return make_dataset(labels, [provenance] * len(labels))


class TestOversample:
    def test_crowd_row_counts(self):
        # crowd annotation counts: S=768, A=209, O=186+217=403
        d = dataset_with_counts(768, 209, 403)
        out = oversample(d, seed=0)
        assert out.class_counts == {S: 768, A: 768, O: 768}
        assert len(out) == 2304

    def test_balanced_unchanged(self):
        d = dataset_with_counts(5, 5, 5)
        out = oversample(d, seed=0)
        assert out.examples == d.examples

    def test_size_is_three_times_max(self):
        d = dataset_with_counts(7, 3, 5)
        assert len(oversample(d, seed=1)) == 3 * 7

    def test_originals_preserved_duplicates_appended(self):
        d = dataset_with_counts(3, 1, 2)
        out = oversample(d, seed=2)
        assert out.examples[: len(d)] == d.examples
        for dup in out.examples[len(d) :]:
            assert dup.provenance is Provenance.OVERSAMPLE
            assert "~os" in dup.id

    def test_only_multiplicities_change(self):
        d = dataset_with_counts(4, 2, 3)
        out = oversample(d, seed=3)
        originals = {(ex.tweet.text, ex.label) for ex in d}
        for dup in out.examples[len(d) :]:
            assert (dup.tweet.text, dup.label) in originals

    def test_seed_determinism(self):
        d = dataset_with_counts(6, 2, 4)
        a = oversample(d, seed=9)
        b = oversample(d, seed=9)
        assert a.examples == b.examples
        c = oversample(d, seed=10)
        assert c.class_counts == a.class_counts

    def test_unique_ids_after_oversample(self):
        d = dataset_with_counts(10, 1, 1)
        out = oversample(d, seed=4)
        ids = [ex.id for ex in out]
        assert len(ids) == len(set(ids))

    def test_empty_class_is_error(self):
        with pytest.raises(AugmentError, match="empty classes"):
            oversample(dataset_with_counts(3, 0, 2), seed=0)


class TestBackTranslate:
    def test_identity_translator_appends_equal_copies(self):
        d = dataset_with_counts(2, 1, 1, provenance=Provenance.EXPERT)
        out = back_translate(d, IdentityTranslator())
        assert len(out) == len(d) + 4
        for src, copy in zip(d.examples, out.examples[len(d) :]):
            assert copy.tweet.text == src.tweet.text
            assert copy.label == src.label
            assert copy.tweet.created_at == src.tweet.created_at
            assert copy.provenance is Provenance.BACKTRANSLATION
            assert copy.id == f"{src.id}~bt"

    def test_empty_dataset(self):
        out = back_translate(LabeledDataset.from_examples([]), IdentityTranslator())
        assert len(out) == 0

    def test_only_human_examples_copied(self):
        examples = list(dataset_with_counts(1, 1, 0, Provenance.EXPERT).examples)
        examples.append(
            LabeledExample(tweet=make_tweet("auto1", "auto text"), label=O, provenance=Provenance.AUTO)
        )
        d = LabeledDataset.from_examples(examples)
        out = back_translate(d, IdentityTranslator())
        assert len(out) == len(d) + 2  # the auto example has no copy

    def test_size_identity_mixed_provenance(self):
        base = dataset_with_counts(10, 10, 10, Provenance.CROWD)
        auto = LabeledDataset.from_examples(
            LabeledExample(tweet=make_tweet(f"x{i}", f"auto {i}"), label=S, provenance=Provenance.AUTO)
            for i in range(1000)
        )
        combined = LabeledDataset.from_examples(base.examples + auto.examples)
        out = back_translate(combined, MockTranslator())
        assert len(out) == len(combined) + 30

    def test_mock_translator_round_trip_is_deterministic(self):
        d = dataset_with_counts(1, 0, 1, Provenance.EXPERT)
        a = back_translate(d, MockTranslator())
        b = back_translate(d, MockTranslator())
        assert a.examples == b.examples
        copy = a.examples[-1]
        assert copy.tweet.text != d.examples[-1].tweet.text  # marker makes it differ

    def test_pivot_round_trip_directions(self):
        calls = []

        class Recorder:
            def translate(self, text, source, target):
                calls.append((source, target))
                return text

        examples = [
            LabeledExample(tweet=make_tweet("en1", "hi", lang="en"), label=S, provenance=Provenance.EXPERT),
            LabeledExample(tweet=make_tweet("de1", "hallo", lang="de"), label=S, provenance=Provenance.EXPERT),
        ]
        back_translate(LabeledDataset.from_examples(examples), Recorder(), pivot="de")
        assert calls == [("en", "de"), ("de", "en"), ("de", "en"), ("en", "de")]

    def test_translator_failure_skips_with_warning(self):
        class Flaky:
            def translate(self, text, source, target):
                if text.endswith(("0", "2")):
                    raise RuntimeError("boom")
                return text

        d = dataset_with_counts(3, 0, 1, Provenance.EXPERT)  # texts "text 0".."text 3"
        with pytest.warns(UserWarning, match="skipped 2 items"):
            out = back_translate(d, Flaky())
        assert len(out) == len(d) + 2  # "text 1" and "text 3" survive

    def test_drop_identical_flag(self):
        d = dataset_with_counts(2, 1, 0, Provenance.EXPERT)
        out = back_translate(d, IdentityTranslator(), drop_identical=True)
        assert len(out) == len(d)

    def test_concurrent_output_order_equals_input_order(self):
        class Sleepy:
            def translate(self, text, source, target):
                time.sleep(0.001 * (hash(text) % 5))
                return text.upper()

        d = dataset_with_counts(8, 8, 8, Provenance.EXPERT)
        seq = back_translate(d, Sleepy(), max_workers=1)
        par = back_translate(d, Sleepy(), max_workers=4)
        assert [ex.tweet.text for ex in par] == [ex.tweet.text for ex in seq]

    def test_timestamps_and_labels_untouched(self):
        d = dataset_with_counts(3, 3, 3, Provenance.EXPERT)
        out = back_translate(d, MockTranslator())
        for src, copy in zip(d.examples, out.examples[len(d) :]):
            assert copy.tweet.created_at == src.tweet.created_at
            assert copy.label == src.label
            assert copy.tweet.lang == src.tweet.lang


class _TranslateHandler(http.server.BaseHTTPRequestHandler):
    fail_first = False
    seen_auth: list = []
    failures_left = 0

    def do_POST(self):
        cls = _TranslateHandler
        cls.seen_auth.append(self.headers.get("Authorization"))
        body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        if cls.failures_left > 0:
            cls.failures_left -= 1
            self.send_response(503)
            self.end_headers()
            return
        payload = json.dumps({"text": f"{body['source']}>{body['target']}:{body['q']}"})
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.end_headers()
        self.wfile.write(payload.encode())

    def log_message(self, *args):
        pass


@pytest.fixture()
def translate_server():
    server = http.server.HTTPServer(("127.0.0.1", 0), _TranslateHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    _TranslateHandler.seen_auth = []
    _TranslateHandler.failures_left = 0
    yield f"http://127.0.0.1:{server.server_port}"
    server.shutdown()


class TestRemoteTranslator:
    def test_round_trip_and_api_key(self, translate_server, monkeypatch):
        monkeypatch.setenv("TRANSLATOR_API_KEY", "sekret")
        t = RemoteTranslator(translate_server)
        out = t.translate("hello", "en", "de")
        assert out == "en>de:hello"
        assert _TranslateHandler.seen_auth[-1] == "Bearer sekret"

    def test_retry_with_backoff(self, translate_server):
        _TranslateHandler.failures_left = 2
        t = RemoteTranslator(translate_server, backoff=0.01)
        assert t.translate("x", "en", "de") == "en>de:x"

    def test_gives_up_after_retries(self, translate_server):
        _TranslateHandler.failures_left = 10
        t = RemoteTranslator(translate_server, max_retries=2, backoff=0.01)
        with pytest.raises(AugmentError, match="after 3 attempts"):
            t.translate("x", "en", "de")

    def test_rate_limit_spacing(self, translate_server):
        t = RemoteTranslator(translate_server, min_interval=0.05)
        start = time.monotonic()
        t.translate("a", "en", "de")
        t.translate("b", "en", "de")
        assert time.monotonic() - start >= 0.05


def test_dataset_jsonl_round_trip(tmp_path):
    d = dataset_with_counts(2, 2, 1, Provenance.CROWD)
    path = tmp_path / "data.jsonl"
    with open(path, "w", encoding="utf-8") as f:
        write_dataset(d, f)
    with open(path, encoding="utf-8") as f:
        d2 = read_dataset(f)
    assert d2.examples == d.examples
    assert d2.class_counts == d.class_counts
