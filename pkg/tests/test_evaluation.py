import io

import numpy as np
import pytest

from fdlbp.evaluation import (
    anmrr,
    arp_arr,
    category_means,
    evaluate_store,
    f_score,
    nmrr,
    precision_recall,
    sweep_store,
)
from fdlbp.retrieval import FeatureStore, rank
from fdlbp.similarity import MEASURES

from metric_oracle import oracle_metrics, oracle_nmrr


def _store(vectors, subjects, ids=None):
    return FeatureStore(
        fingerprint=b"\x07" * 8,
        item_ids=ids or [f"i{k}" for k in range(len(vectors))],
        subject_ids=list(subjects),
        vectors=np.asarray(vectors, dtype=np.float32),
    )


def _random_store(rng, n_subjects=3, per_subject=4, dim=16):
    vectors, subjects = [], []
    for s in range(n_subjects):
        center = rng.uniform(0, 1, dim)
        for _ in range(per_subject):
            v = center + rng.normal(0, 0.05, dim)
            v = np.abs(v)
            vectors.append(v / v.sum())
            subjects.append(f"s{s}")
    return _store(vectors, subjects)


@pytest.fixture
def two_class_store():
    # class A sits near the first axis, class B near the last
    vectors = [
        [0.9, 0.1, 0.0, 0.0],
        [0.8, 0.2, 0.0, 0.0],
        [0.7, 0.3, 0.0, 0.0],
        [0.0, 0.0, 0.2, 0.8],
        [0.0, 0.0, 0.3, 0.7],
    ]
    return _store(vectors, ["A", "A", "A", "B", "B"])


class TestPrecisionRecall:
    def test_three_correct_of_five(self):
        # one subject with 3 items, n = 5 retrieves all 5 items
        vectors = np.eye(5, dtype=np.float64) * 0.5 + 0.1
        store = _store(vectors, ["q", "q", "q", "x", "y"])
        ranked = rank(store, "i0", "l1")
        pr, re = precision_recall(ranked, store, 5)
        assert pr == pytest.approx(3 / 5)
        assert re == pytest.approx(1.0)

    def test_perfect_recall_at_category_size(self, two_class_store):
        ranked = rank(two_class_store, "i0", "chisq")
        pr, re = precision_recall(ranked, two_class_store, 3)
        assert pr == 1.0 and re == 1.0

    def test_matches_oracle_on_toy_store(self, two_class_store):
        from metric_oracle import oracle_precision_recall, oracle_rankings

        vectors = two_class_store.vectors.astype(np.float64).tolist()
        oracle_orders = oracle_rankings(two_class_store.item_ids, two_class_store.subject_ids, vectors, "chisq")
        for qi, qid in enumerate(two_class_store.item_ids):
            ranked = rank(two_class_store, qid, "chisq")
            for n in (1, 2, 3, 5):
                got = precision_recall(ranked, two_class_store, n)
                want = oracle_precision_recall(
                    oracle_orders[qi], two_class_store.subject_ids, two_class_store.subject_ids[qi], n
                )
                assert got == pytest.approx(want)

    def test_n_out_of_range(self, two_class_store):
        ranked = rank(two_class_store, "i0", "chisq")
        with pytest.raises(ValueError):
            precision_recall(ranked, two_class_store, 0)
        with pytest.raises(ValueError):
            precision_recall(ranked, two_class_store, 6)


class TestCategoryMeans:
    def test_single_category_equals_query_mean(self, rng):
        store = _random_store(rng, n_subjects=1, per_subject=5)
        means = category_means(store, "chisq", n=3)
        assert set(means) == {"s0"}
        prs = []
        for qid in store.item_ids:
            ranked = rank(store, qid, "chisq")
            prs.append(precision_recall(ranked, store, 3)[0])
        mp, _ = means["s0"]
        assert mp == pytest.approx(sum(prs) / len(prs))

    def test_identical_images_perfect_precision(self):
        vectors = [[0.5, 0.5]] * 3
        store = _store(vectors, ["dup"] * 3)
        means = category_means(store, "l1", n=3)
        assert means["dup"] == (1.0, 1.0)


class TestArpArr:
    def test_single_category(self, rng):
        store = _random_store(rng, n_subjects=1, per_subject=4)
        arp, arr = arp_arr(store, "chisq", n=2)
        mp, mr = category_means(store, "chisq", n=2)["s0"]
        assert (arp, arr) == (mp, mr)

    def test_unweighted_across_unequal_categories(self):
        # category A (3 identical items) scores MP=1; category B's singleton
        # at n=2 must retrieve one wrong item, so MP=0.5; ARP averages to 0.75
        vectors = [[1.0, 0.0]] * 3 + [[0.0, 1.0]]
        store = _store(vectors, ["A", "A", "A", "B"])
        arp, _ = arp_arr(store, "l1", n=2)
        assert arp == pytest.approx((1.0 + 0.5) / 2)

    def test_matches_oracle(self, rng, two_class_store):
        for measure in ("chisq", "l1"):
            for n in (1, 2, 4):
                arp, arr = arp_arr(two_class_store, measure, n)
                o_arp, o_arr, _, _ = oracle_metrics(
                    two_class_store.item_ids,
                    two_class_store.subject_ids,
                    two_class_store.vectors.astype(np.float64).tolist(),
                    measure,
                    n,
                )
                assert arp == pytest.approx(o_arp) and arr == pytest.approx(o_arr)


class TestFScore:
    def test_equal_inputs(self):
        assert f_score(0.4, 0.4) == pytest.approx(0.4)

    def test_hand_value(self):
        assert f_score(60.0, 30.0) == pytest.approx(40.0)

    def test_zero_case(self):
        assert f_score(0.0, 0.0) == 0.0

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            f_score(-1.0, 2.0)


class TestNmrr:
    def test_perfect_ranking_is_zero(self):
        # ground truth occupying the top ranks hits the AVR minimum
        assert nmrr([1, 2, 3], k=12) == pytest.approx(0.0)

    def test_nothing_in_window_is_one(self):
        assert nmrr([50, 60, 70], k=12) == pytest.approx(1.0)

    def test_matches_transcription(self, rng):
        for _ in range(50):
            ng = int(rng.integers(1, 8))
            k = int(rng.integers(2 * ng, 4 * ng + 1))
            ranks = sorted(int(r) for r in rng.integers(1, 40, ng))
            assert nmrr(ranks, k) == pytest.approx(oracle_nmrr(ranks, k), abs=1e-12)

    def test_bounds(self, rng):
        for _ in range(100):
            ng = int(rng.integers(1, 6))
            k = 2 * ng
            ranks = sorted(int(r) for r in rng.integers(1, 30, ng))
            value = nmrr(ranks, k)
            assert -1e-12 <= value <= 1.0 + 1e-12


class TestAnmrr:
    def test_perfect_store_is_zero(self):
        vectors = [[1.0, 0.0]] * 3 + [[0.0, 1.0]] * 3
        store = _store(vectors, ["A"] * 3 + ["B"] * 3)
        assert anmrr(store, "l1", n=3) == pytest.approx(0.0, abs=1e-12)

    def test_matches_oracle(self, rng):
        store = _random_store(rng)
        for n in (1, 3, 6):
            got = anmrr(store, "chisq", n)
            _, _, _, want = oracle_metrics(
                store.item_ids,
                store.subject_ids,
                store.vectors.astype(np.float64).tolist(),
                "chisq",
                n,
            )
            assert got == pytest.approx(want, abs=1e-12)

    def test_bounded_on_random_stores(self, rng):
        for _ in range(3):
            store = _random_store(rng, n_subjects=2, per_subject=3)
            for n in (1, 2, 5):
                value = anmrr(store, "euclidean", n)
                assert 0.0 <= value <= 1.0


class TestReports:
    def test_arp_at_one_is_always_perfect(self, rng):
        store = _random_store(rng)
        for measure in MEASURES:
            report = evaluate_store(store, measure, n=1)
            assert report.rows[0].arp == pytest.approx(1.0), measure

    def test_arr_non_decreasing_in_n(self, rng):
        store = _random_store(rng)
        report = sweep_store(store, "chisq", n_max=len(store))
        arrs = [row.arr for row in report.rows]
        assert all(a <= b + 1e-12 for a, b in zip(arrs, arrs[1:]))

    def test_fscore_consistency(self, rng):
        store = _random_store(rng)
        report = sweep_store(store, "chisq", n_max=6)
        for row in report.rows:
            assert row.fscore == pytest.approx(f_score(row.arp, row.arr))

    def test_sweep_matches_single_evaluations(self, rng):
        store = _random_store(rng)
        swept = sweep_store(store, "l1", n_max=5)
        for n in range(1, 6):
            single = evaluate_store(store, "l1", n).rows[0]
            assert swept.rows[n - 1] == single

    def test_csv_format(self, rng):
        store = _random_store(rng)
        report = evaluate_store(store, "chisq", n=1, config={"measure": "chisq"})
        buf = io.StringIO()
        report.write_csv(buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "# measure=chisq"
        assert lines[1] == "n,arp,arr,fscore,anmrr"
        fields = lines[2].split(",")
        assert fields[0] == "1"
        assert fields[1] == "100.00"
        for cell in fields[1:]:
            whole, frac = cell.split(".")
            assert len(frac) == 2

    def test_per_category_csv(self, rng):
        store = _random_store(rng, n_subjects=2)
        report = evaluate_store(store, "chisq", n=2)
        buf = io.StringIO()
        report.write_per_category_csv(buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "subject,mp,mr"
        assert len(lines) == 3

    def test_exclude_query_changes_metrics(self, rng):
        store = _random_store(rng)
        with_self = evaluate_store(store, "chisq", n=1).rows[0]
        without = evaluate_store(store, "chisq", n=1, exclude_query=True).rows[0]
        assert with_self.arp == pytest.approx(1.0)
        assert without.arp <= with_self.arp

    def test_bad_n_rejected(self, rng):
        store = _random_store(rng, n_subjects=1, per_subject=3)
        with pytest.raises(ValueError):
            evaluate_store(store, "chisq", n=0)
        with pytest.raises(ValueError):
            evaluate_store(store, "chisq", n=4)
