import math

import numpy as np
import pytest

from fdlbp.descriptor import extract
from fdlbp.similarity import MEASURES, distance, distances_to

from conftest import random_int_image
from metric_oracle import oracle_distance


def _random_normalized(rng, n=32):
    v = rng.uniform(0, 1, n)
    return v / v.sum()


class TestIdentities:
    def test_self_distance_zero_for_all_measures(self, rng):
        v = _random_normalized(rng)
        for measure in MEASURES:
            assert distance(v, v, measure) == 0.0, measure

    def test_hand_example(self):
        a = np.array([1.0, 0.0])
        b = np.array([0.0, 1.0])
        assert distance(a, b, "l1") == 2.0
        assert distance(a, b, "euclidean") == pytest.approx(math.sqrt(2), abs=1e-15)
        assert distance(a, b, "chisq") == 2.0
        assert distance(a, b, "emd") == 1.0
        assert distance(a, b, "d1") == 1.0
        assert distance(a, b, "cosine") == 1.0

    def test_chi_square_disjoint_support_is_two(self, rng):
        a = np.zeros(16)
        b = np.zeros(16)
        a[:8] = _random_normalized(rng, 8)
        b[8:] = _random_normalized(rng, 8)
        assert distance(a, b, "chisq") == 2.0

    def test_symmetry(self, rng):
        for measure in MEASURES:
            for _ in range(5):
                a = _random_normalized(rng)
                b = _random_normalized(rng)
                assert abs(distance(a, b, measure) - distance(b, a, measure)) <= 1e-12, measure

    def test_non_negative_and_positive_on_distinct(self, rng):
        a = _random_normalized(rng)
        b = _random_normalized(rng)
        for measure in ("l1", "euclidean", "chisq", "d1", "emd"):
            assert distance(a, b, measure) > 0.0
            assert distance(a, a, measure) == 0.0

    def test_triangle_inequality_l1_euclidean(self, rng):
        for _ in range(20):
            a, b, c = (_random_normalized(rng) for _ in range(3))
            for measure in ("l1", "euclidean"):
                dab = distance(a, b, measure)
                dbc = distance(b, c, measure)
                dac = distance(a, c, measure)
                assert dac <= dab + dbc + 1e-12

    def test_matches_oracle_formulas(self, rng):
        a = _random_normalized(rng)
        b = _random_normalized(rng)
        for measure in MEASURES:
            got = distance(a, b, measure)
            want = oracle_distance(list(a), list(b), measure)
            assert got == pytest.approx(want, rel=1e-12), measure


class TestEdgeCases:
    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError, match="length mismatch"):
            distance(np.zeros(4), np.zeros(5), "l1")

    def test_unknown_measure_rejected(self):
        with pytest.raises(ValueError, match="unknown measure"):
            distance(np.zeros(4), np.zeros(4), "manhattan")

    def test_fingerprint_mismatch_rejected(self, rng):
        img = random_int_image(rng, 8, 8)
        a = extract(img, "fdlbp")
        b = extract(img, "lbp")
        with pytest.raises(ValueError, match="fingerprints"):
            distance(a, b, "chisq")

    def test_feature_vectors_compare(self, rng):
        img = random_int_image(rng, 8, 8)
        a = extract(img, "fdlbp")
        b = extract(img + 1.0, "fdlbp")
        assert distance(a, b, "chisq") == 0.0  # brightness shift is invisible

    def test_cosine_zero_vectors(self):
        z = np.zeros(4)
        v = np.array([1.0, 0.0, 0.0, 0.0])
        assert distance(z, z, "cosine") == 0.0
        assert distance(z, v, "cosine") == 1.0

    def test_emd_per_block_variant(self):
        # block mode cannot transport across the boundary: stranded mass pays
        # its block-local CDF all the way to the block end
        a = np.array([1.0, 0.0, 0.0, 0.0])
        b = np.array([0.0, 0.0, 1.0, 0.0])
        assert distance(a, b, "emd") == 2.0
        assert distance(a, b, "emd", emd_block_size=2) == 4.0
        c = np.array([0.0, 1.0, 0.0, 0.0])
        assert distance(a, c, "emd", emd_block_size=2) == 1.0
        assert distance(a, c, "emd") == 1.0

    def test_emd_block_size_must_divide(self):
        with pytest.raises(ValueError, match="divide"):
            distance(np.zeros(5), np.zeros(5), "emd", emd_block_size=2)


class TestVectorized:
    def test_distances_to_matches_pairwise(self, rng):
        matrix = np.stack([_random_normalized(rng) for _ in range(6)])
        q = _random_normalized(rng)
        for measure in MEASURES:
            batch = distances_to(matrix, q, measure)
            singles = [distance(matrix[i], q, measure) for i in range(6)]
            assert np.allclose(batch, singles, rtol=1e-12, atol=1e-15), measure

    def test_distances_to_self_row(self, rng):
        matrix = np.stack([_random_normalized(rng) for _ in range(4)])
        for measure in MEASURES:
            batch = distances_to(matrix, matrix[2], measure)
            assert batch[2] == pytest.approx(0.0, abs=1e-15)

    def test_shape_mismatch_rejected(self, rng):
        with pytest.raises(ValueError, match="incompatible"):
            distances_to(np.zeros((3, 4)), np.zeros(5), "l1")
