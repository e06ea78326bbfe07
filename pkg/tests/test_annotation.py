import numpy as np
import pytest
from helpers import aggregate_oracle

from solidarity.annotation import (
    Annotation,
    AnnotationError,
    LabelCoarse,
    LabelFine,
    aggregate_crowd,
    build_gold,
    collapse_label,
    compute_reliability,
    read_adjudications,
    read_annotations,
    write_annotations,
)

S, A, AMB, NA = LabelFine


def ann(tweet_id, annotator_id, label, stage=None):
    return Annotation(tweet_id=tweet_id, annotator_id=annotator_id, label=LabelFine(label), stage=stage)


class TestCollapse:
    def test_total_mapping(self):
        assert collapse_label(S) == LabelCoarse.S
        assert collapse_label(A) == LabelCoarse.A
        assert collapse_label(AMB) == LabelCoarse.O
        assert collapse_label(NA) == LabelCoarse.O

    def test_integer_coding_fixed(self):
        assert [int(l) for l in LabelFine] == [0, 1, 2, 3]

    def test_class_order(self):
        assert [l.index for l in LabelCoarse] == [0, 1, 2]


class TestBuildGold:
    def test_unique_majority(self):
        gold = build_gold([ann("1", "a", S), ann("1", "b", S), ann("1", "c", A)])
        assert gold.labels["1"] == S

    def test_two_way_tie_adjudicated(self):
        gold = build_gold([ann("1", "a", S), ann("1", "b", A)], {"1": S})
        assert gold.labels["1"] == S

    def test_undecided_goes_to_excluded(self):
        gold = build_gold([ann("1", "a", S), ann("1", "b", A)], {"1": "undecided"})
        assert "1" in gold.excluded
        assert "1" not in gold.labels

    def test_missing_adjudication_is_error(self):
        with pytest.raises(AnnotationError, match="no unique majority"):
            build_gold([ann("1", "a", S), ann("1", "b", A)])

    def test_duplicate_annotation_is_error(self):
        with pytest.raises(AnnotationError, match="duplicate annotation"):
            build_gold([ann("1", "a", S), ann("1", "a", S)])

    def test_deterministic(self):
        annotations = [ann("1", "a", S), ann("1", "b", A), ann("2", "a", AMB), ann("2", "b", AMB)]
        g1 = build_gold(annotations, {"1": "undecided"})
        g2 = build_gold(list(reversed(annotations)), {"1": "undecided"})
        assert g1 == g2


class TestComputeReliability:
    def _gold(self, labels):
        return build_gold(
            [ann(tid, who, l) for tid, l in labels.items() for who in ("e1", "e2")]
        )

    def test_full_agreement_is_one(self):
        labels = {f"t{i}": S for i in range(10)}
        gold = self._gold(labels)
        crowd = [ann(tid, "w", S) for tid in labels]
        assert compute_reliability(crowd, gold)["w"] == 1.0

    def test_four_item_pattern(self):
        # collapses to S,S,A,O vs S,A,A,O: kappa = 7/11
        gold = self._gold({"1": S, "2": A, "3": A, "4": NA})
        crowd = [ann("1", "w", S), ann("2", "w", S), ann("3", "w", A), ann("4", "w", AMB)]
        assert compute_reliability(crowd, gold, granularity=3)["w"] == pytest.approx(7 / 11)

    def test_granularity_four_distinguishes_amb_na(self):
        gold = self._gold({"1": AMB, "2": NA})
        crowd = [ann("1", "w", NA), ann("2", "w", AMB)]
        assert compute_reliability(crowd, gold, granularity=3)["w"] == 1.0
        assert compute_reliability(crowd, gold, granularity=4)["w"] == -1.0

    def test_zero_overlap_is_none(self):
        gold = self._gold({"1": S})
        crowd = [ann("other", "w", S)]
        assert compute_reliability(crowd, gold)["w"] is None

    def test_bad_granularity(self):
        with pytest.raises(AnnotationError):
            compute_reliability([], self._gold({"1": S}), granularity=2)


class TestAggregateCrowd:
    def test_majority(self):
        assert aggregate_crowd([ann("1", "a", S), ann("1", "b", S), ann("1", "c", A)]) == S

    def test_three_way_tie_reliability_break(self):
        annotations = [ann("1", "a", S), ann("1", "b", A), ann("1", "c", AMB)]
        reliabilities = {"a": 0.7, "b": 0.5, "c": 0.6}
        assert aggregate_crowd(annotations, reliabilities) == S

    def test_singleton(self):
        assert aggregate_crowd([ann("1", "a", A)]) == A

    def test_tie_without_reliabilities_lexicographic(self):
        annotations = [ann("1", "zed", A), ann("1", "amy", S)]
        assert aggregate_crowd(annotations) == S  # amy < zed

    def test_undefined_reliability_loses(self):
        annotations = [ann("1", "a", S), ann("1", "b", A)]
        assert aggregate_crowd(annotations, {"a": None, "b": 0.1}) == A

    def test_zero_annotations_is_error(self):
        with pytest.raises(AnnotationError):
            aggregate_crowd([])

    def test_mixed_tweets_is_error(self):
        with pytest.raises(AnnotationError, match="multiple tweets"):
            aggregate_crowd([ann("1", "a", S), ann("2", "b", S)])

    def test_permutation_invariance(self):
        rng = np.random.default_rng(23)
        reliabilities = {"a": 0.9, "b": 0.3, "c": None, "d": 0.3}
        for _ in range(100):
            k = int(rng.integers(1, 5))
            annotators = ["a", "b", "c", "d"][:k]
            annotations = [ann("1", who, int(rng.integers(0, 4))) for who in annotators]
            expected = aggregate_crowd(annotations, reliabilities)
            perm = list(rng.permutation(k))
            assert aggregate_crowd([annotations[i] for i in perm], reliabilities) == expected

    def test_strict_majority_ignores_reliability(self):
        rng = np.random.default_rng(31)
        for _ in range(100):
            majority = LabelFine(int(rng.integers(0, 4)))
            others = [l for l in LabelFine if l != majority]
            annotations = [
                ann("1", "a", majority),
                ann("1", "b", majority),
                ann("1", "c", majority),
                ann("1", "d", others[int(rng.integers(0, 3))]),
            ]
            reliabilities = {w: float(rng.random()) for w in "abcd"}
            assert aggregate_crowd(annotations, reliabilities) == majority

    def test_unanimous_coarse_collapse(self):
        rng = np.random.default_rng(37)
        for _ in range(50):
            coarse = [LabelCoarse.S, LabelCoarse.A, LabelCoarse.O][int(rng.integers(0, 3))]
            fines = [l for l in LabelFine if collapse_label(l) == coarse]
            annotations = [
                ann("1", f"w{i}", fines[int(rng.integers(0, len(fines)))]) for i in range(3)
            ]
            assert collapse_label(aggregate_crowd(annotations)) == coarse

    def test_matches_enumeration_oracle(self):
        reliabilities = {"a1": 0.8, "a2": 0.2, "a3": None, "a4": 0.8}
        annotators = ["a1", "a2", "a3", "a4"]
        fine = [S, A, AMB]
        checked = 0
        for n in range(1, 5):
            def walk(prefix):
                nonlocal checked
                if len(prefix) == n:
                    annotations = [ann("1", annotators[i], l) for i, l in enumerate(prefix)]
                    expected = aggregate_oracle(prefix, annotators[:n], reliabilities)
                    assert aggregate_crowd(annotations, reliabilities) == expected
                    checked += 1
                    return
                for l in fine:
                    walk(prefix + [l])

            walk([])
        assert checked == 3 + 9 + 27 + 81


class TestCsvRoundTrip:
    def test_annotations(self, tmp_path):
        annotations = [ann("1", "a", S, "I"), ann("2", "b", NA)]
        path = tmp_path / "ann.csv"
        write_annotations(path, annotations)
        assert read_annotations(path) == annotations

    def test_bad_label_value(self, tmp_path):
        path = tmp_path / "ann.csv"
        path.write_text("tweet_id,annotator_id,label\n1,a,7\n")
        with pytest.raises(AnnotationError, match="bad label"):
            read_annotations(path)

    def test_missing_columns(self, tmp_path):
        path = tmp_path / "ann.csv"
        path.write_text("tweet_id,label\n1,0\n")
        with pytest.raises(AnnotationError, match="must have columns"):
            read_annotations(path)

    def test_adjudications(self, tmp_path):
        path = tmp_path / "adj.csv"
        path.write_text("tweet_id,label\nt1,0\nt2,undecided\n")
        assert read_adjudications(path) == {"t1": S, "t2": "undecided"}
