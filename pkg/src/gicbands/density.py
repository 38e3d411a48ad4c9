"""Kernel estimation on the probability scale.

Three pieces feed the plug-in confidence band:

* the quantile density q(p) = 1/f(Q(p)) of the *log-transformed* data,
  estimated by convolving a compact second-order kernel with the jumps of
  the empirical quantile function;
* the scale ratio between the two samples, estimated as the ratio of
  leave-one-out estimates of the squared-density integrals of the log data
  (integral of f^2 equals E f(X));
* an almost-sure correction bound added to the critical value when the two
  quantile densities are not proportional.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .backend import kernels
from .errors import DataValidationError, NumericalError
from .quantiles import ProbabilityGrid, Sample

EPANECHNIKOV_HALF = "epanechnikov_halfsupport"
UNIFORM_HALF = "uniform_halfsupport"

_FAMILY_CODES = {
    EPANECHNIKOV_HALF: kernels.EPANECHNIKOV_HALF,
    UNIFORM_HALF: kernels.UNIFORM_HALF,
}


@dataclass(frozen=True)
class KernelSpec:
    """Second-order kernel with support [-1/2, 1/2]."""

    family: str = EPANECHNIKOV_HALF

    def __post_init__(self):
        if self.family not in _FAMILY_CODES:
            raise DataValidationError(
                f"unknown kernel family {self.family!r}; choose from {sorted(_FAMILY_CODES)}"
            )

    @property
    def support(self) -> tuple[float, float]:
        return (-0.5, 0.5)

    @property
    def code(self) -> int:
        return _FAMILY_CODES[self.family]


@dataclass(frozen=True)
class RateParams:
    """Exponents for bandwidth h = n^-eta, trimming eps = n^-beta, and slack delta.

    Both constraints of the plug-in band theory are enforced:
    3*beta + delta < eta < 1/2 and eta/2 + delta + 2*beta < 1/2.
    """

    eta: float = 0.4
    beta: float = 0.1
    delta: float = 0.05

    def __post_init__(self):
        if min(self.eta, self.beta, self.delta) <= 0.0:
            raise DataValidationError("rate exponents must be positive")
        if not (3.0 * self.beta + self.delta < self.eta < 0.5):
            raise DataValidationError(
                f"need 3*beta + delta < eta < 1/2; got eta={self.eta}, beta={self.beta}, delta={self.delta}"
            )
        if not (self.eta / 2.0 + self.delta + 2.0 * self.beta < 0.5):
            raise DataValidationError(
                f"need eta/2 + delta + 2*beta < 1/2; got eta={self.eta}, beta={self.beta}, delta={self.delta}"
            )


@dataclass(frozen=True)
class QuantileDensityEstimate:
    """q-hat values on a grid together with the bandwidth that produced them."""

    grid: ProbabilityGrid
    values: np.ndarray
    bandwidth: float
    eta: float
    sample_size: int
    degenerate: bool = False

    def __post_init__(self):
        if np.any(self.values <= 0.0):
            raise NumericalError("quantile density values must be strictly positive")
        if not 0.0 < self.bandwidth < 0.5:
            raise DataValidationError(f"bandwidth must lie in (0, 1/2), got {self.bandwidth}")


def check_bandwidth_window(grid: ProbabilityGrid, h: float):
    """The estimator needs [p - h/2, p + h/2] inside (0, 1) at every grid point."""
    pts = grid.points
    bad = np.nonzero((pts - h / 2.0 <= 0.0) | (pts + h / 2.0 >= 1.0))[0]
    if bad.size:
        p = pts[bad[0]]
        raise DataValidationError(
            f"bandwidth window [p - {h / 2.0:g}, p + {h / 2.0:g}] leaves (0, 1) at "
            f"grid point p={p:g}; trim the grid or reduce the bandwidth"
        )


def kernel_quantile_density(
    sample: Sample,
    grid: ProbabilityGrid,
    kernel: KernelSpec = KernelSpec(),
    rates: RateParams = RateParams(),
    floor_scale: float = 1e-12,
) -> QuantileDensityEstimate:
    """Kernel quantile-density estimate of the log-transformed sample.

    q-hat(p) = h^-1 * sum_k K((p - k/n)/h) * (L_(k+1) - L_(k)) with L the
    sorted log data and h = n^-eta.  Values are floored at a tiny positive
    multiple of the log-range so downstream band widths never divide by zero;
    a floored estimate is flagged degenerate.
    """
    n = sample.n
    h = float(n) ** (-rates.eta)
    if h >= 0.5:
        raise DataValidationError(
            f"bandwidth n^-eta = {h:g} >= 1/2 at n={n}; need a larger sample for eta={rates.eta}"
        )
    check_bandwidth_window(grid, h)
    values = kernels.quantile_density(sample.log_sorted, grid.points, h, kernel.code)
    log_range = float(sample.log_sorted[-1] - sample.log_sorted[0])
    floor = floor_scale * (log_range if log_range > 0.0 else 1.0)
    degenerate = bool(np.any(values < floor))
    values = np.maximum(values, floor)
    return QuantileDensityEstimate(
        grid=grid, values=values, bandwidth=h, eta=rates.eta, sample_size=n, degenerate=degenerate
    )


def _silverman_bandwidth(log_values: np.ndarray) -> float:
    sd = float(np.std(log_values, ddof=1))
    q75, q25 = np.percentile(log_values, [75.0, 25.0])
    iqr = float(q75 - q25)
    sigma = min(sd, iqr / 1.349) if iqr > 0.0 else sd
    if sigma <= 0.0:
        raise DataValidationError("degenerate (zero-variance) sample; scale ratio undefined")
    return 1.06 * sigma * float(log_values.size) ** (-0.2)


def _squared_density_integral(log_sorted: np.ndarray) -> float:
    """Leave-one-out estimate of integral f^2 = E f(X) on the log scale."""
    n = log_sorted.size
    h = _silverman_bandwidth(log_sorted)
    total = kernels.pair_kernel_sum(log_sorted, h, kernels.EPANECHNIKOV_UNIT)
    est = total / (n * (n - 1) * h)
    if est <= 0.0:
        raise NumericalError(
            "squared-density integral estimate is zero (no pairs within one bandwidth); "
            "the sample is too sparse for the scale estimator"
        )
    return est


def estimate_scale(s1: Sample, s2: Sample) -> float:
    """Ratio of squared-density integrals of the log data of the two samples.

    Under proportional quantile densities this is the proportionality
    constant; for log data differing only in location and scale it reduces
    to sigma_1/sigma_2.
    """
    return _squared_density_integral(s2.log_sorted) / _squared_density_integral(s1.log_sorted)


def correction_bound(
    q1: QuantileDensityEstimate,
    q2: QuantileDensityEstimate,
    scale: float,
    n1: int,
    n2: int,
    rates: RateParams = RateParams(),
    nu_grid_size: int = 181,
) -> float:
    """Almost-sure bound added to the critical value when q1 != scale * q2.

    Minimizes over nu in [0, 1/2 - delta] the product of the iterated-log
    factor, 4^nu / sqrt(2), and the sup over the grid of
    |(q1 - scale*q2)/(q1 + scale*q2)| * (p(1-p))^nu.
    """
    if scale <= 0.0:
        raise DataValidationError(f"scale must be positive, got {scale}")
    if q1.grid.size != q2.grid.size or not np.array_equal(q1.grid.points, q2.grid.points):
        raise DataValidationError("quantile density estimates must share a grid")
    eff = n1 * n2 / (n1 + scale * scale * n2)
    loglog = math.log(math.log(math.sqrt(eff))) if eff > 1.0 else float("-inf")
    if not loglog > 0.0:
        raise NumericalError(
            f"effective size n1*n2/(n1 + s^2*n2) = {eff:g} is too small for the "
            "iterated-logarithm bound; increase the sample sizes"
        )
    p = q1.grid.points
    contrast = np.abs(q1.values - scale * q2.values) / (q1.values + scale * q2.values)
    weight_base = p * (1.0 - p)
    nus = np.linspace(0.0, 0.5 - rates.delta, nu_grid_size)
    best = math.inf
    for nu in nus:
        sup = float(np.max(contrast * weight_base**nu))
        val = math.sqrt(loglog) * (4.0**nu / math.sqrt(2.0)) * sup
        best = min(best, val)
    return best
