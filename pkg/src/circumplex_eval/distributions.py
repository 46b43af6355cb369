"""Upper-tail probabilities used for p-values.

Thin wrappers over the cephes routines in :mod:`scipy.special`
(regularized incomplete gamma / beta, complementary error function).
"""
from __future__ import annotations

import math

from scipy import special


def chi_square_sf(x: float, df: float) -> float:
    """P(X >= x) for a chi-square variable with ``df`` degrees of freedom."""
    if df <= 0:
        raise ValueError(f"df must be positive, got {df}")
    if x < 0:
        raise ValueError(f"chi-square statistic must be >= 0, got {x}")
    if x == 0:
        return 1.0
    if math.isinf(x):
        return 0.0
    return float(special.gammaincc(0.5 * df, 0.5 * x))


def student_t_sf(t: float, df: float) -> float:
    """P(T >= t) for Student's t with ``df`` degrees of freedom."""
    if df <= 0:
        raise ValueError(f"df must be positive, got {df}")
    if t == 0:
        return 0.5
    if math.isinf(t):
        return 0.0 if t > 0 else 1.0
    return float(special.stdtr(df, -t))


def normal_sf(z: float) -> float:
    """P(Z >= z) for a standard normal variable."""
    if math.isinf(z):
        return 0.0 if z > 0 else 1.0
    return float(0.5 * special.erfc(z / math.sqrt(2.0)))
