"""Chunked evaluation of row-wise kernels.

Rows are always cut into the same fixed-size chunks, whatever the thread
count, and the per-row partial results are concatenated in row order before
any reduction. Reductions therefore see identical operands in identical
order, so serial and threaded runs agree bit for bit.
"""
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

CHUNK_ROWS = 128

_threads = None


def set_threads(n):
    """Set the worker count used by kernel sums (``None`` restores the default)."""
    global _threads
    if n is not None and int(n) < 1:
        raise ValueError("thread count must be >= 1")
    _threads = None if n is None else int(n)


def get_threads():
    if _threads is not None:
        return _threads
    env = os.environ.get("GMTKIT_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def chunk_bounds(n, chunk=CHUNK_ROWS):
    return [(a, min(a + chunk, n)) for a in range(0, n, chunk)]


def map_rows(func, n, chunk=CHUNK_ROWS):
    """Apply ``func(a, b)`` to fixed row chunks of ``range(n)``.

    ``func`` returns a 1-D array of per-row values for rows ``a..b-1``; the
    chunks are stitched back together in order.
    """
    bounds = chunk_bounds(n, chunk)
    if not bounds:
        return np.zeros(0)
    threads = get_threads()
    if threads == 1 or len(bounds) == 1:
        parts = [func(a, b) for a, b in bounds]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda ab: func(*ab), bounds))
    return np.concatenate([np.asarray(p, dtype=float).reshape(-1) for p in parts])


def tree_sum(values):
    """Pairwise (tree) sum of a 1-D array in fixed order."""
    values = np.ascontiguousarray(values, dtype=float).reshape(-1)
    if values.size == 0:
        return 0.0
    while values.size > 1:
        if values.size % 2:
            values = np.append(values, 0.0)
        values = values[0::2] + values[1::2]
    return float(values[0])
