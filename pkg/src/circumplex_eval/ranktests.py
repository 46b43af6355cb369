"""Nonparametric rank tests.

Kruskal-Wallis (with the rank eta-squared effect size), the Conover-Iman
pairwise posthoc, the Mann-Whitney-Wilcoxon rank-sum test, the Friedman test,
and the Prentice generalization of Friedman to replicated, unbalanced or
incomplete block designs.  All ranks are midranks; every chi-square type
statistic is corrected for ties.

Degenerate inputs (everything tied) return ``p = 1`` with ``degenerate=True``
instead of NaN so that survey data with unanimous ratings never stops a run.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from itertools import combinations
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from . import _kernels
from .distributions import chi_square_sf, normal_sf, student_t_sf
from .errors import RankTestError

midranks = _kernels.midranks


class Method(str, enum.Enum):
    KRUSKAL_WALLIS = "Kruskal-Wallis"
    FRIEDMAN = "Friedman"
    PRENTICE = "Prentice"
    MANN_WHITNEY = "Mann-Whitney"
    CONOVER_IMAN = "Conover-Iman"


class EffectBand(str, enum.Enum):
    SMALL = "Small"
    MODERATE = "Moderate"
    LARGE = "Large"


@dataclass(frozen=True)
class EffectSize:
    eta_sq: float
    band: EffectBand


@dataclass(frozen=True)
class TestResult:
    __test__ = False  # keep pytest from collecting this class

    method: Method
    statistic: float
    df: int | None
    p_value: float
    effect_size: EffectSize | None = None
    degenerate: bool = False
    flags: tuple[str, ...] = ()

    def significant(self, alpha: float) -> bool:
        return self.p_value < alpha


@dataclass(frozen=True)
class PairwiseResult:
    pair: tuple[Hashable, Hashable]
    statistic: float
    p_raw: float
    p_adjusted: float
    df: int | None = None
    block: Hashable | None = None
    degenerate: bool = False


@dataclass(frozen=True)
class BlockedObservation:
    block_label: Hashable
    group_label: Hashable
    value: float


def _as_samples(groups) -> tuple[list, list[np.ndarray]]:
    if isinstance(groups, Mapping):
        labels = list(groups.keys())
        arrays = [np.asarray(v, dtype=np.float64).ravel() for v in groups.values()]
    else:
        arrays = [np.asarray(v, dtype=np.float64).ravel() for v in groups]
        labels = list(range(len(arrays)))
    if len(arrays) < 2:
        raise RankTestError(f"need at least 2 groups, got {len(arrays)}")
    for label, a in zip(labels, arrays):
        if a.size == 0:
            raise RankTestError(f"group {label!r} is empty")
        if not np.all(np.isfinite(a)):
            raise RankTestError(f"group {label!r} contains non-finite values")
    return labels, arrays


def kw_eta_squared(H: float, k: int, n: int) -> float:
    """Rank eta-squared ``(H - k + 1) / (n - k)``; may be slightly negative."""
    if k < 2:
        raise RankTestError("eta squared needs k >= 2 groups")
    if n <= k:
        raise RankTestError(f"eta squared needs n > k (n={n}, k={k})")
    return (H - k + 1) / (n - k)


def effect_band(eta_sq: float) -> EffectBand:
    if eta_sq < 0.06:
        return EffectBand.SMALL
    if eta_sq <= 0.14:
        return EffectBand.MODERATE
    return EffectBand.LARGE


def _kw_core(arrays: Sequence[np.ndarray]) -> tuple[float, np.ndarray, float, bool]:
    """Return (H, pooled midranks, tie correction C, degenerate)."""
    pooled = np.concatenate(arrays)
    n = pooled.size
    ranks = midranks(pooled)
    c = 1.0 - _kernels.tie_sum(pooled) / (n**3 - n)
    if c <= 0.0:
        return 0.0, ranks, 0.0, True
    bounds = np.cumsum([0] + [a.size for a in arrays])
    total = 0.0
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        r = math.fsum(ranks[lo:hi])
        total += r * r / (hi - lo)
    h = (12.0 / (n * (n + 1)) * total - 3.0 * (n + 1)) / c
    return max(float(h), 0.0), ranks, c, False


def kruskal_wallis(groups) -> TestResult:
    """Tie-corrected Kruskal-Wallis H test with chi-square(k - 1) p-value.

    ``groups`` is a sequence of samples or a mapping ``label -> sample``.
    """
    _, arrays = _as_samples(groups)
    k = len(arrays)
    n = sum(a.size for a in arrays)
    if n < 3:
        raise RankTestError(f"Kruskal-Wallis needs at least 3 observations, got {n}")
    h, _, _, degenerate = _kw_core(arrays)
    effect = None
    if n > k:
        eta = kw_eta_squared(h, k, n)
        effect = EffectSize(eta, effect_band(eta))
    if degenerate:
        return TestResult(Method.KRUSKAL_WALLIS, 0.0, k - 1, 1.0, effect, True, ("all values tied",))
    return TestResult(Method.KRUSKAL_WALLIS, h, k - 1, chi_square_sf(h, k - 1), effect)


def bonferroni(p_values: Iterable[float], family_size: int | None = None) -> list[float]:
    ps = [float(p) for p in p_values]
    m = len(ps) if family_size is None else int(family_size)
    if m < 1:
        raise RankTestError("Bonferroni family size must be positive")
    if m < len(ps):
        raise RankTestError(f"family size {m} smaller than number of p-values {len(ps)}")
    for p in ps:
        if not 0.0 <= p <= 1.0:
            raise RankTestError(f"p-value {p} outside [0, 1]")
    return [min(1.0, m * p) for p in ps]


def conover_iman(groups, family_size: int | None = None) -> list[PairwiseResult]:
    """Conover-Iman pairwise comparisons of mean pooled ranks.

    Two-sided Student-t p-values on ``N - k`` degrees of freedom, adjusted
    with Bonferroni over ``k(k-1)/2`` pairs unless ``family_size`` is given.
    Pairs are returned as ``(i, j)`` for ``i < j`` in input order; the
    statistic is positive when group ``i`` has the larger mean rank.
    """
    labels, arrays = _as_samples(groups)
    k = len(arrays)
    n = sum(a.size for a in arrays)
    pairs = list(combinations(range(k), 2))
    m = len(pairs) if family_size is None else family_size
    df = n - k
    h, ranks, _, degenerate = _kw_core(arrays)
    s2 = (math.fsum(ranks * ranks) - n * (n + 1) ** 2 / 4.0) / (n - 1) if n > 1 else 0.0
    if degenerate or s2 <= 0.0 or df <= 0:
        return [
            PairwiseResult((labels[i], labels[j]), 0.0, 1.0, 1.0, max(df, 0), degenerate=True)
            for i, j in pairs
        ]
    bounds = np.cumsum([0] + [a.size for a in arrays])
    mean_rank = [math.fsum(ranks[lo:hi]) / (hi - lo) for lo, hi in zip(bounds[:-1], bounds[1:])]
    scale = s2 * max(n - 1 - h, 0.0) / df
    stats, raw = [], []
    for i, j in pairs:
        diff = mean_rank[i] - mean_rank[j]
        se = math.sqrt(scale * (1.0 / arrays[i].size + 1.0 / arrays[j].size))
        if se == 0.0:
            t = 0.0 if diff == 0.0 else math.copysign(math.inf, diff)
        else:
            t = float(diff / se)
        stats.append(t)
        raw.append(min(1.0, 2.0 * student_t_sf(abs(t), df)))
    adjusted = bonferroni(raw, m)
    return [
        PairwiseResult((labels[i], labels[j]), t, p, q, df)
        for (i, j), t, p, q in zip(pairs, stats, raw, adjusted)
    ]


EXACT_MAX_N = 20


def mann_whitney(x, y, exact: bool | None = None) -> TestResult:
    """Two-sided Mann-Whitney-Wilcoxon rank-sum test.

    The statistic is ``U = (rank sum of x) - n_x (n_x + 1) / 2``.  By default
    the exact null distribution is used when ``n_x + n_y <= 20`` and there
    are no ties; otherwise a normal approximation with tie-corrected
    variance and a 0.5 continuity correction.
    """
    _, (xa, ya) = _as_samples([x, y])
    nx, ny = xa.size, ya.size
    n = nx + ny
    pooled = np.concatenate([xa, ya])
    ranks = midranks(pooled)
    u = math.fsum(ranks[:nx]) - nx * (nx + 1) / 2.0
    ties = _kernels.tie_sum(pooled)
    use_exact = (n <= EXACT_MAX_N and ties == 0.0) if exact is None else exact
    if use_exact:
        if ties > 0.0:
            raise RankTestError("exact Mann-Whitney p-value requires untied data")
        counts = _kernels.rank_sum_counts(nx, n)
        total = math.comb(n, nx)
        ui = int(round(u))
        lower = float(np.sum(counts[: ui + 1]))
        upper = float(np.sum(counts[ui:]))
        p = min(1.0, 2.0 * min(lower, upper) / total)
        return TestResult(Method.MANN_WHITNEY, u, None, p, flags=("exact",))
    var = nx * ny / 12.0 * ((n + 1) - ties / (n * (n - 1)))
    if var <= 0.0:
        return TestResult(Method.MANN_WHITNEY, u, None, 1.0, degenerate=True, flags=("all values tied",))
    d = u - nx * ny / 2.0
    z = (d - math.copysign(0.5, d) if d != 0.0 else 0.0) / math.sqrt(var)
    p = min(1.0, 2.0 * min(normal_sf(z), normal_sf(-z)))
    return TestResult(Method.MANN_WHITNEY, u, None, p, flags=("normal",))


def friedman(blocks) -> TestResult:
    """Tie-corrected Friedman test on a complete ``b x k`` matrix (blocks are rows)."""
    m = np.asarray(blocks, dtype=np.float64)
    if m.ndim != 2:
        raise RankTestError("Friedman input must be a 2-D blocks x treatments matrix")
    b, k = m.shape
    if b < 2 or k < 2:
        raise RankTestError(f"Friedman needs b >= 2 and k >= 2, got {b} x {k}")
    if not np.all(np.isfinite(m)):
        raise RankTestError("incomplete Friedman matrix; use prentice() for incomplete designs")
    row_codes = np.repeat(np.arange(b), k)
    ranks = _kernels.block_midranks(m.ravel(), row_codes).reshape(b, k)
    col_sums = ranks.sum(axis=0)
    ties = sum(_kernels.tie_sum(row) for row in m)
    denom = 1.0 - ties / (b * k * (k * k - 1))
    if denom <= 1e-12:
        return TestResult(Method.FRIEDMAN, 0.0, k - 1, 1.0, degenerate=True, flags=("all values tied",))
    q = (12.0 / (b * k * (k + 1)) * float(np.sum(col_sums**2)) - 3.0 * b * (k + 1)) / denom
    q = max(q, 0.0)
    return TestResult(Method.FRIEDMAN, q, k - 1, chi_square_sf(q, k - 1))


def _codes(labels: Sequence[Hashable]) -> tuple[list, np.ndarray]:
    uniq = sorted(set(labels), key=lambda v: (type(v).__name__, str(v)))
    index = {v: i for i, v in enumerate(uniq)}
    return uniq, np.fromiter((index[v] for v in labels), dtype=np.int64, count=len(labels))


BLOCK_WEIGHTS = ("prentice", "unweighted")


def prentice(values, groups, blocks, weights: str = "prentice") -> TestResult:
    """Prentice rank test for a block design with arbitrary cell counts.

    Observations are ranked within their block.  For each group the weighted
    deviation of its within-block rank sums from their null expectation is
    accumulated over blocks, together with the exact conditional covariance
    under within-block permutation (tie-aware).  The statistic is the
    quadratic form of the deviations in a generalized inverse of the
    covariance, referred to chi-square with df equal to the covariance rank
    (``g - 1`` unless the design is singular).

    ``weights="prentice"`` scales block ``i`` by ``1 / (n_i + 1)`` so rank
    scores become expected uniform quantiles; ``"unweighted"`` uses raw
    ranks.  With one observation per cell in a complete design, or with a
    single block, every constant weighting reproduces the tie-corrected
    Friedman or Kruskal-Wallis statistic exactly.

    Blocks with fewer than two observations or a single group are dropped
    with a warning.
    """
    if weights not in BLOCK_WEIGHTS:
        raise ValueError(f"weights must be one of {BLOCK_WEIGHTS}, got {weights!r}")
    y = np.asarray(values, dtype=np.float64).ravel()
    group_labels = list(groups)
    block_labels = list(blocks)
    if not (y.size == len(group_labels) == len(block_labels)):
        raise RankTestError("values, groups and blocks must have equal length")
    if not np.all(np.isfinite(y)):
        raise RankTestError("Prentice input contains non-finite values")

    block_names, bcode = _codes(block_labels)
    _, gcode_all = _codes(group_labels)
    keep = np.zeros(y.size, dtype=bool)
    dropped = []
    for b in range(len(block_names)):
        idx = bcode == b
        if idx.sum() >= 2 and np.unique(gcode_all[idx]).size >= 2:
            keep |= idx
        else:
            dropped.append(block_names[b])
    if dropped:
        warnings.warn(f"Prentice: dropping {len(dropped)} block(s) lacking 2 groups: {dropped}",
                      stacklevel=2)
    if not keep.any():
        raise RankTestError("Prentice: no usable block with >= 2 observations across >= 2 groups")

    y = y[keep]
    _, bcode = _codes([b for b, k in zip(block_labels, keep) if k])
    _, gcode = _codes([g for g, k in zip(group_labels, keep) if k])
    nb = int(bcode.max()) + 1
    g = int(gcode.max()) + 1
    if g < 2:
        raise RankTestError("Prentice needs at least 2 groups")

    ranks = _kernels.block_midranks(y, bcode)
    n_block = np.bincount(bcode, minlength=nb).astype(np.float64)
    cell = bcode * g + gcode
    n_cell = np.bincount(cell, minlength=nb * g).reshape(nb, g).astype(np.float64)
    s_cell = np.bincount(cell, weights=ranks, minlength=nb * g).reshape(nb, g)
    centre = (n_block + 1.0) / 2.0
    dev2 = np.bincount(bcode, weights=(ranks - centre[bcode]) ** 2, minlength=nb)
    tau2 = dev2 / n_block  # population variance of the block's (mid)ranks

    w = 1.0 / (n_block + 1.0) if weights == "prentice" else np.ones(nb)
    u = np.sum(w[:, None] * (s_cell - n_cell * centre[:, None]), axis=0)
    c = w**2 * tau2 / (n_block - 1.0)
    v = np.diag(np.sum((c * n_block)[:, None] * n_cell, axis=0)) - (n_cell * c[:, None]).T @ n_cell

    scale = float(np.max(np.abs(v))) if v.size else 0.0
    if scale == 0.0:
        return TestResult(Method.PRENTICE, 0.0, g - 1, 1.0, degenerate=True, flags=("all values tied",))
    rank = int(np.linalg.matrix_rank(v, tol=scale * 1e-10 * g))
    if rank == 0:
        return TestResult(Method.PRENTICE, 0.0, 0, 1.0, degenerate=True, flags=("zero covariance",))
    flags: tuple[str, ...] = ()
    if dropped:
        flags += (f"dropped {len(dropped)} block(s)",)
    if rank < g - 1:
        flags += (f"singular covariance (rank {rank} < {g - 1})",)
    if rank == g - 1:
        # V annihilates the ones vector and so do the deviations, so
        # deleting one group gives the same quadratic form.
        q = float(u[:-1] @ np.linalg.solve(v[:-1, :-1], u[:-1]))
    else:
        q = float(u @ np.linalg.pinv(v, rcond=1e-10) @ u)
    q = max(q, 0.0)
    return TestResult(Method.PRENTICE, q, rank, chi_square_sf(q, rank), flags=flags)


def prentice_observations(observations: Iterable[BlockedObservation], weights: str = "prentice") -> TestResult:
    obs = list(observations)
    return prentice([o.value for o in obs], [o.group_label for o in obs], [o.block_label for o in obs],
                    weights=weights)
