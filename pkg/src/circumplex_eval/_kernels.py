"""Rank kernels shared by every test, with a numba path and a numpy path.

The backend is chosen once at import time; inputs larger than
``JIT_MAX_N`` always take the numpy path.  Set ``CIRCUMPLEX_EVAL_JIT=0`` to
force the pure-numpy implementations; otherwise the numba versions are used
when numba imports cleanly.  Both paths are always importable under their
private names so tests and benchmarks can compare them directly.
"""
from __future__ import annotations

import os

import numpy as np

try:
    import numba as _nb
except ImportError:  # pragma: no cover - numba is an optional speedup
    _nb = None

_flag = os.environ.get("CIRCUMPLEX_EVAL_JIT", "1").strip().lower()
USE_JIT = _nb is not None and _flag not in {"0", "false", "no", "off"}
BACKEND = "numba" if USE_JIT else "numpy"
# Above this many values numpy's vectorized sort beats the compiled loops
# (see benchmarks/bench_kernels.py), so the dispatchers fall back to numpy.
JIT_MAX_N = 1000


# ---------------------------------------------------------------------------
# numpy implementations


def _midranks_numpy(values: np.ndarray) -> np.ndarray:
    x = np.asarray(values, dtype=np.float64)
    n = x.size
    if n == 0:
        return np.empty(0, dtype=np.float64)
    order = np.argsort(x, kind="mergesort")
    xs = x[order]
    # run boundaries of equal values
    starts = np.flatnonzero(np.r_[True, xs[1:] != xs[:-1]])
    ends = np.r_[starts[1:], n]
    avg = (starts + ends + 1) / 2.0
    ranks_sorted = np.repeat(avg, ends - starts)
    out = np.empty(n, dtype=np.float64)
    out[order] = ranks_sorted
    return out


def _tie_sum_numpy(values: np.ndarray) -> float:
    """Sum of t**3 - t over groups of tied values."""
    x = np.asarray(values, dtype=np.float64)
    if x.size < 2:
        return 0.0
    _, counts = np.unique(x, return_counts=True)
    t = counts.astype(np.float64)
    return float(np.sum(t**3 - t))


def _block_midranks_numpy(values: np.ndarray, blocks: np.ndarray) -> np.ndarray:
    x = np.asarray(values, dtype=np.float64)
    b = np.asarray(blocks, dtype=np.int64)
    out = np.empty(x.size, dtype=np.float64)
    for code in np.unique(b):
        idx = np.flatnonzero(b == code)
        out[idx] = _midranks_numpy(x[idx])
    return out


def _rank_sum_counts_numpy(n_x: int, n_total: int) -> np.ndarray:
    """Number of n_x-subsets of ranks 1..n_total, indexed by U = sum - n_x(n_x+1)/2."""
    n_y = n_total - n_x
    max_u = n_x * n_y
    # counts[j, u]: subsets of size j with statistic u among ranks processed so far,
    # using the recurrence on whether the largest rank is included.
    counts = np.zeros((n_x + 1, max_u + 1), dtype=np.float64)
    counts[0, 0] = 1.0
    for m in range(1, n_total + 1):
        # including rank m as the j-th chosen element adds m - j to U
        for j in range(min(m, n_x), 0, -1):
            shift = m - j
            if shift > max_u:
                continue
            counts[j, shift:] += counts[j - 1, : max_u + 1 - shift]
    return counts[n_x]


# ---------------------------------------------------------------------------
# numba implementations

if _nb is not None:

    @_nb.njit(cache=True)
    def _midranks_jit(values):
        n = values.size
        out = np.empty(n, dtype=np.float64)
        if n == 0:
            return out
        order = np.argsort(values, kind="mergesort")
        i = 0
        while i < n:
            j = i + 1
            v = values[order[i]]
            while j < n and values[order[j]] == v:
                j += 1
            avg = (i + j + 1) / 2.0
            for t in range(i, j):
                out[order[t]] = avg
            i = j
        return out

    @_nb.njit(cache=True)
    def _tie_sum_jit(values):
        n = values.size
        if n < 2:
            return 0.0
        xs = np.sort(values)
        total = 0.0
        i = 0
        while i < n:
            j = i + 1
            while j < n and xs[j] == xs[i]:
                j += 1
            t = float(j - i)
            total += t * t * t - t
            i = j
        return total

    @_nb.njit(cache=True)
    def _block_midranks_jit(values, blocks):
        n = values.size
        out = np.empty(n, dtype=np.float64)
        order = np.argsort(blocks, kind="mergesort")
        i = 0
        while i < n:
            j = i + 1
            while j < n and blocks[order[j]] == blocks[order[i]]:
                j += 1
            idx = order[i:j]
            sub = np.empty(j - i, dtype=np.float64)
            for t in range(j - i):
                sub[t] = values[idx[t]]
            r = _midranks_jit(sub)
            for t in range(j - i):
                out[idx[t]] = r[t]
            i = j
        return out

    @_nb.njit(cache=True)
    def _rank_sum_counts_jit(n_x, n_total):
        n_y = n_total - n_x
        max_u = n_x * n_y
        counts = np.zeros((n_x + 1, max_u + 1), dtype=np.float64)
        counts[0, 0] = 1.0
        for m in range(1, n_total + 1):
            top = m if m < n_x else n_x
            for j in range(top, 0, -1):
                shift = m - j
                if shift > max_u:
                    continue
                for u in range(max_u, shift - 1, -1):
                    counts[j, u] += counts[j - 1, u - shift]
        return counts[n_x].copy()


# ---------------------------------------------------------------------------
# public dispatch


def midranks(values) -> np.ndarray:
    x = np.ascontiguousarray(values, dtype=np.float64)
    if USE_JIT and x.size <= JIT_MAX_N:
        return _midranks_jit(x)
    return _midranks_numpy(x)


def tie_sum(values) -> float:
    x = np.ascontiguousarray(values, dtype=np.float64)
    if USE_JIT and x.size <= JIT_MAX_N:
        return float(_tie_sum_jit(x))
    return _tie_sum_numpy(x)


def block_midranks(values, blocks) -> np.ndarray:
    x = np.ascontiguousarray(values, dtype=np.float64)
    b = np.ascontiguousarray(blocks, dtype=np.int64)
    if USE_JIT and x.size <= JIT_MAX_N:
        return _block_midranks_jit(x, b)
    return _block_midranks_numpy(x, b)


def rank_sum_counts(n_x: int, n_total: int) -> np.ndarray:
    if USE_JIT:
        return _rank_sum_counts_jit(int(n_x), int(n_total))
    return _rank_sum_counts_numpy(int(n_x), int(n_total))
