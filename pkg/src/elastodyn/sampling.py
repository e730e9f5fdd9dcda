"""Latin hypercube collocation sampling and epoch batching."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class CollocationBatch:
    """Scaled space-time(-parameter) points where residuals are evaluated."""

    points: np.ndarray  # (n, d)
    bounds: np.ndarray  # (d, 2) as [lo, hi] rows

    def __post_init__(self):
        lo, hi = self.bounds[:, 0], self.bounds[:, 1]
        if not (np.all(self.points >= lo) and np.all(self.points <= hi)):
            raise ValueError("collocation points outside bounds")


def lhs(n, bounds, seed):
    """Latin hypercube sample: one point per equal stratum per dimension.

    Strata are paired across dimensions by independent random permutations,
    with uniform jitter inside each stratum.  Deterministic per seed.
    """
    n = int(n)
    if n < 1:
        raise ValueError("need at least one sample")
    bounds = np.asarray(bounds, dtype=float).reshape(-1, 2)
    if np.any(bounds[:, 0] >= bounds[:, 1]):
        raise ValueError("each bound must satisfy lo < hi")
    rng = np.random.default_rng(seed)
    d = bounds.shape[0]
    pts = np.empty((n, d))
    for j in range(d):
        strata = rng.permutation(n)
        jitter = rng.uniform(0.0, 1.0, size=n)
        unit = (strata + jitter) / n
        pts[:, j] = bounds[j, 0] + unit * (bounds[j, 1] - bounds[j, 0])
    return CollocationBatch(pts, bounds)


def epoch_batches(dataset_size, batch_size, seed, epoch=0):
    """Shuffled index batches covering 0..N-1 once; last batch may be short.

    A fresh permutation is drawn per epoch; deterministic per (seed, epoch).
    """
    n, b = int(dataset_size), int(batch_size)
    if b < 1 or b > n:
        raise ValueError(f"batch_size must be in 1..{n}, got {b}")
    rng = np.random.default_rng([int(seed), int(epoch)])
    perm = rng.permutation(n)
    return [perm[i:i + b] for i in range(0, n, b)]
