import numpy as np
import pytest

from mwkmeans import adjusted_rand, relative_error


class TestAdjustedRand:
    def test_identical_partitions(self):
        assert adjusted_rand([0, 0, 1, 1, 2], [0, 0, 1, 1, 2]) == 1.0

    def test_hand_contingency_example(self):
        assert adjusted_rand([1, 1, 2, 2], [1, 1, 1, 2]) == 0.0

    def test_label_permutation_invariance(self):
        assert adjusted_rand([1, 1, 2, 2], [2, 2, 1, 1]) == 1.0
        rng = np.random.default_rng(0)
        for _ in range(10):
            a = rng.integers(0, 4, size=30)
            b = rng.integers(0, 3, size=30)
            perm = rng.permutation(4)
            assert adjusted_rand(a, b) == pytest.approx(adjusted_rand(perm[a], b), abs=1e-12)

    def test_symmetry(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            a = rng.integers(0, 3, size=25)
            b = rng.integers(0, 5, size=25)
            assert adjusted_rand(a, b) == pytest.approx(adjusted_rand(b, a), abs=1e-12)

    def test_bounded_above_by_one(self):
        rng = np.random.default_rng(2)
        for _ in range(25):
            a = rng.integers(0, 4, size=20)
            b = rng.integers(0, 4, size=20)
            assert adjusted_rand(a, b) <= 1.0

    def test_independent_partitions_near_zero(self):
        rng = np.random.default_rng(3)
        values = [adjusted_rand(rng.integers(0, 3, 600), rng.integers(0, 3, 600))
                  for _ in range(20)]
        assert abs(float(np.mean(values))) < 0.02

    def test_degenerate_single_block_both(self):
        assert adjusted_rand([0, 0, 0], [5, 5, 5]) == 1.0

    def test_degenerate_all_singletons_both(self):
        assert adjusted_rand([0, 1, 2], [2, 0, 1]) == 1.0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            adjusted_rand([0, 1], [0, 1, 2])


class TestRelativeError:
    def test_exact(self):
        assert relative_error(3, 3) == 0.0

    def test_quarter(self):
        assert relative_error(4, 5) == 0.25

    def test_large_overshoot(self):
        assert relative_error(2, 20) == 9.0

    def test_requires_positive_true_k(self):
        with pytest.raises(ValueError):
            relative_error(0, 3)
