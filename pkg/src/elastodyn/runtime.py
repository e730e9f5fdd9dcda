"""Process-wide knobs: internal parallelism of batch evaluation.

Batch evaluation is numpy-vectorized, so the only internal parallelism is
the BLAS thread pool.  On the small per-step matrices this package works
with, thread fan-out is pure overhead (measured ~6x slower on 2 cores),
so the default bound is a single thread.
"""

from __future__ import annotations

import os

try:
    import threadpoolctl
except ImportError:  # pragma: no cover
    threadpoolctl = None

DEFAULT_THREADS = 1


def set_threads(n):
    """Bound the BLAS pool to ``n`` threads; returns the applied bound."""
    n = int(n)
    if n < 1:
        raise ValueError("threads must be >= 1")
    if threadpoolctl is not None:
        threadpoolctl.threadpool_limits(limits=n)
    return n


def threads_from_env(config_value=None):
    """ELASTODYN_THREADS wins over the config value, which wins over the default."""
    env = os.environ.get("ELASTODYN_THREADS")
    if env is not None:
        return int(env)
    if config_value is not None:
        return int(config_value)
    return DEFAULT_THREADS
