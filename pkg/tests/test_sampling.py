"""Latin hypercube stratification and epoch batching checks."""

import numpy as np
import pytest

from elastodyn import sampling


def occupancy(points, bounds, n):
    """Per-dimension histogram of stratum occupancy."""
    lo = bounds[:, 0]
    hi = bounds[:, 1]
    strata = np.floor((points - lo) / (hi - lo) * n).astype(int)
    strata = np.clip(strata, 0, n - 1)
    return [np.bincount(strata[:, j], minlength=n) for j in range(points.shape[1])]


class TestLhs:
    def test_single_point_in_bounds(self):
        batch = sampling.lhs(1, [(0.0, 1.0)], seed=0)
        assert batch.points.shape == (1, 1)
        assert 0.0 <= batch.points[0, 0] <= 1.0

    def test_four_strata_1d(self):
        batch = sampling.lhs(4, [(0.0, 1.0)], seed=5)
        assert sorted(np.floor(batch.points[:, 0] * 4).astype(int)) == [0, 1, 2, 3]

    def test_occupancy_all_ones_500x3(self):
        bounds = np.array([(0.0, 1.0), (-2.0, 3.0), (10.0, 11.0)])
        batch = sampling.lhs(500, bounds, seed=42)
        for counts in occupancy(batch.points, bounds, 500):
            assert np.array_equal(counts, np.ones(500, dtype=int))

    def test_deterministic_per_seed(self):
        a = sampling.lhs(64, [(0, 1), (0, 2)], seed=9)
        b = sampling.lhs(64, [(0, 1), (0, 2)], seed=9)
        assert np.array_equal(a.points, b.points)

    def test_degenerate_bounds_rejected(self):
        with pytest.raises(ValueError):
            sampling.lhs(4, [(1.0, 1.0)], seed=0)

    def test_zero_count_rejected(self):
        with pytest.raises(ValueError):
            sampling.lhs(0, [(0.0, 1.0)], seed=0)

    def test_marginal_uniformity_3sigma(self):
        # the stratified mean has expectation 1/2 and variance 1/(12 n^3)
        n, n_seeds = 50, 200
        means = np.array([sampling.lhs(n, [(0.0, 1.0)], seed=s).points.mean()
                          for s in range(n_seeds)])
        sigma = np.sqrt(1.0 / (12.0 * n**3) / n_seeds)
        assert abs(means.mean() - 0.5) < 3.0 * sigma


class TestEpochBatches:
    def test_exact_partition(self):
        batches = sampling.epoch_batches(4, 2, seed=0)
        assert len(batches) == 2
        assert sorted(np.concatenate(batches)) == [0, 1, 2, 3]

    def test_short_last_batch(self):
        sizes = [len(b) for b in sampling.epoch_batches(5, 2, seed=1)]
        assert sizes == [2, 2, 1]

    def test_paper_shape_ten_batches(self):
        batches = sampling.epoch_batches(142 * 10, 142, seed=3)
        assert len(batches) == 10
        assert all(len(b) == 142 for b in batches)

    def test_fresh_permutation_each_epoch(self):
        a = np.concatenate(sampling.epoch_batches(64, 16, seed=7, epoch=0))
        b = np.concatenate(sampling.epoch_batches(64, 16, seed=7, epoch=1))
        assert not np.array_equal(a, b)
        assert sorted(a) == sorted(b)

    def test_deterministic_per_seed_epoch(self):
        a = sampling.epoch_batches(32, 8, seed=2, epoch=5)
        b = sampling.epoch_batches(32, 8, seed=2, epoch=5)
        assert all(np.array_equal(x, y) for x, y in zip(a, b))

    @pytest.mark.parametrize("epoch", range(8))
    def test_partition_property_every_epoch(self, epoch):
        batches = sampling.epoch_batches(37, 8, seed=11, epoch=epoch)
        allidx = np.concatenate(batches)
        assert sorted(allidx) == list(range(37))

    def test_invalid_batch_sizes(self):
        with pytest.raises(ValueError):
            sampling.epoch_batches(4, 0, seed=0)
        with pytest.raises(ValueError):
            sampling.epoch_batches(4, 5, seed=0)
