"""Order statistics, empirical quantile functions, and two-sample curve estimators.

All estimators work on the classical empirical quantile function

    Q_hat(p) = X_(k)  for  (k-1)/n < p <= k/n,

which is equivariant under strictly monotone transformations; in particular
the empirical quantile of the log data equals the log of the empirical
quantile.  Curve estimators evaluate on a fixed probability grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .backend import kernels
from .errors import DataValidationError


@dataclass(frozen=True)
class Sample:
    """Strictly positive univariate sample with cached order statistics."""

    values: np.ndarray
    sorted: np.ndarray
    log_sorted: np.ndarray
    n: int

    @classmethod
    def from_values(cls, values) -> "Sample":
        arr = np.asarray(values, dtype=np.float64)
        if arr.ndim != 1:
            raise DataValidationError(f"sample must be one-dimensional, got shape {arr.shape}")
        if arr.size < 2:
            raise DataValidationError(f"need at least 2 observations, got {arr.size}")
        if not np.all(np.isfinite(arr)):
            raise DataValidationError("sample contains non-finite values")
        if np.any(arr <= 0.0):
            raise DataValidationError("sample values must be strictly positive")
        srt = np.sort(arr)
        return cls(values=arr, sorted=srt, log_sorted=np.log(srt), n=int(arr.size))


@dataclass(frozen=True)
class ProbabilityGrid:
    """Strictly increasing evaluation points in (0, 1) with their trimming bounds."""

    points: np.ndarray
    trim_lo: float
    trim_hi: float

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        object.__setattr__(self, "points", pts)
        if pts.ndim != 1 or pts.size == 0:
            raise DataValidationError("grid needs at least one point")
        if np.any(np.diff(pts) <= 0.0):
            raise DataValidationError("grid points must be strictly increasing")
        if not (0.0 < self.trim_lo <= pts[0] and pts[-1] <= self.trim_hi < 1.0):
            raise DataValidationError(
                f"trimming bounds ({self.trim_lo}, {self.trim_hi}) must bracket the "
                f"grid inside (0, 1); grid spans [{pts[0]}, {pts[-1]}]"
            )

    @classmethod
    def equidistant(cls, size: int, trim_lo: float, trim_hi: float) -> "ProbabilityGrid":
        if size < 2:
            raise DataValidationError(f"grid size must be >= 2, got {size}")
        if not 0.0 < trim_lo < trim_hi < 1.0:
            raise DataValidationError(f"need 0 < trim_lo < trim_hi < 1, got ({trim_lo}, {trim_hi})")
        return cls(np.linspace(trim_lo, trim_hi, size), trim_lo, trim_hi)

    @property
    def size(self) -> int:
        return int(self.points.size)


@dataclass(frozen=True)
class GicParams:
    """Annualization exponent m = 1/(t2 - t1) in (0, 1] for growth incidence curves."""

    m: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.m <= 1.0:
            raise DataValidationError(f"annualization exponent must lie in (0, 1], got {self.m}")


def _check_probs(p: np.ndarray):
    if np.any(p <= 0.0) or np.any(p > 1.0):
        raise DataValidationError("probabilities must lie in (0, 1]")


def empirical_quantile(sample: Sample, p: float) -> float:
    """Sample quantile X_(k) at the unique k with (k-1)/n < p <= k/n."""
    arr = np.asarray([p], dtype=np.float64)
    _check_probs(arr)
    return float(kernels.quantile_values(sample.sorted, arr)[0])


def sample_quantiles(sample: Sample, probs, *, log_scale: bool = False) -> np.ndarray:
    """Vectorized empirical quantiles, optionally of the log-transformed data."""
    p = np.atleast_1d(np.asarray(probs, dtype=np.float64))
    _check_probs(p)
    src = sample.log_sorted if log_scale else sample.sorted
    return kernels.quantile_values(src, p)


def quantile_indices(n: int, probs) -> np.ndarray:
    """Zero-based order-statistic index k-1 for each p, same selection rule."""
    p = np.atleast_1d(np.asarray(probs, dtype=np.float64))
    _check_probs(p)
    ranks = kernels.quantile_values(np.arange(1.0, n + 1.0), p)
    return ranks.astype(np.int64) - 1


def quantile_ratio(s1: Sample, s2: Sample, grid: ProbabilityGrid) -> np.ndarray:
    """Pointwise ratio of the two empirical quantile functions, Q2/Q1."""
    return sample_quantiles(s2, grid.points) / sample_quantiles(s1, grid.points)


def gic_curve(s1: Sample, s2: Sample, grid: ProbabilityGrid, params: GicParams) -> np.ndarray:
    """Growth incidence curve estimate (Q2/Q1)^m - 1."""
    return np.power(quantile_ratio(s1, s2, grid), params.m) - 1.0


def log_qte_curve(s1: Sample, s2: Sample, grid: ProbabilityGrid) -> np.ndarray:
    """Difference of log-scale empirical quantile functions.

    Computed directly from the log-transformed order statistics; by monotone
    equivariance this equals log(quantile_ratio) up to floating point.
    """
    return sample_quantiles(s2, grid.points, log_scale=True) - sample_quantiles(
        s1, grid.points, log_scale=True
    )


def ate_from_curve(s1: Sample, s2: Sample, grid: ProbabilityGrid) -> float:
    """Trapezoid approximation of integral Q1(p) * (1 - Q2(p)/Q1(p)) dp over the grid.

    This is the mean difference E[X1] - E[X2] when the grid spans (0, 1)
    densely; tail mass outside the trimming bounds is not included.
    """
    q1 = sample_quantiles(s1, grid.points)
    g = quantile_ratio(s1, s2, grid)
    return float(np.trapezoid(q1 * (1.0 - g), grid.points))
