"""Distribution of the supremum of a standard Brownian bridge.

P(sup |B(p)| <= c) = sum_{k=-inf}^{inf} (-1)^k exp(-2 k^2 c^2), evaluated by
summing the symmetric pairs of the two-sided series with an alternating-series
truncation bound.  The quantile is obtained by bisection plus Newton polish.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DataValidationError, NumericalError

# below this point the true CDF is < 1e-300 and the alternating series cancels
# catastrophically in float64
_SMALL_C = 0.04


@dataclass(frozen=True)
class KolmogorovSeriesParams:
    tolerance: float = 1e-12
    max_terms: int = 200

    def __post_init__(self):
        if not self.tolerance > 0.0:
            raise DataValidationError(f"tolerance must be positive, got {self.tolerance}")
        if self.max_terms < 10:
            raise DataValidationError(f"max_terms must be >= 10, got {self.max_terms}")


_DEFAULT_PARAMS = KolmogorovSeriesParams()


def kolmogorov_cdf(c: float, params: KolmogorovSeriesParams = _DEFAULT_PARAMS) -> float:
    """P(sup_p |B(p)| <= c) for a standard Brownian bridge B."""
    if c < 0.0:
        raise DataValidationError(f"sup-norm bound must be non-negative, got {c}")
    if c < _SMALL_C:
        return 0.0
    total = 1.0
    for k in range(1, params.max_terms + 1):
        term = 2.0 * math.exp(-2.0 * k * k * c * c)
        total += term if k % 2 == 0 else -term
        # alternating series: remainder is bounded by the next term
        if 2.0 * math.exp(-2.0 * (k + 1) * (k + 1) * c * c) < params.tolerance:
            break
    return min(1.0, max(0.0, total))


def _cdf_derivative(c: float, params: KolmogorovSeriesParams) -> float:
    total = 0.0
    for k in range(1, params.max_terms + 1):
        term = k * k * math.exp(-2.0 * k * k * c * c)
        total += term if k % 2 == 1 else -term
        if (k + 1) * (k + 1) * math.exp(-2.0 * (k + 1) * (k + 1) * c * c) < params.tolerance:
            break
    return 8.0 * c * total


def kolmogorov_quantile(level: float, params: KolmogorovSeriesParams = _DEFAULT_PARAMS) -> float:
    """c with P(sup |B| <= c) = level, to within 1e-10 in probability."""
    if not 0.0 < level < 1.0:
        raise DataValidationError(f"level must lie in (0, 1), got {level}")
    lo, hi = _SMALL_C, 5.0
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        if kolmogorov_cdf(mid, params) < level:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-2:
            break
    c = 0.5 * (lo + hi)
    for _ in range(60):
        err = kolmogorov_cdf(c, params) - level
        if abs(err) < 1e-10:
            return c
        deriv = _cdf_derivative(c, params)
        if deriv <= 0.0:
            break
        step = err / deriv
        c -= step
        if not lo <= c <= hi:
            # fall back to bisection when Newton leaves the bracket
            if kolmogorov_cdf(0.5 * (lo + hi), params) < level:
                lo = 0.5 * (lo + hi)
            else:
                hi = 0.5 * (lo + hi)
            c = 0.5 * (lo + hi)
    if abs(kolmogorov_cdf(c, params) - level) < 1e-10:
        return c
    raise NumericalError(f"quantile inversion did not converge for level {level}")
