"""Point-wise and simultaneous confidence bands for two-sample quantile comparisons.

All simultaneous constructions work on the log scale, where the difference of
empirical quantile functions of the log data estimates log(Q2(p)/Q1(p)); bands
are then mapped to the ratio, growth-incidence, or raw-difference scales by
monotone transforms, so coverage statements carry over exactly.

Two simultaneous methods are provided: the plug-in band, whose half-width
combines the Brownian-bridge critical value with estimated quantile densities,
and the direct band, which evaluates the empirical quantile functions at
probability-shifted arguments and needs no smoothing.  Two point-wise
constructions (the log-normal asymptotic interval and a bootstrap-t baseline)
are included for comparison; they do not provide simultaneous coverage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.stats import norm, t as student_t

from .density import (
    KernelSpec,
    QuantileDensityEstimate,
    RateParams,
    correction_bound,
    estimate_scale,
    kernel_quantile_density,
)
from .errors import DataValidationError, NumericalError
from .kolmogorov import kolmogorov_quantile
from .quantiles import (
    GicParams,
    ProbabilityGrid,
    Sample,
    gic_curve,
    log_qte_curve,
    quantile_indices,
    sample_quantiles,
)

SCALE_LOG_QTE = "log_qte"
SCALE_RATIO = "ratio"
SCALE_GIC = "gic"
SCALE_QTE = "qte"
SCALES = (SCALE_LOG_QTE, SCALE_RATIO, SCALE_GIC, SCALE_QTE)

METHOD_PLUGIN = "plugin"
METHOD_DIRECT = "direct"
METHOD_POINTWISE = "pointwise_lognormal"
METHOD_POINTWISE_NORMAL = "pointwise_normal"
METHOD_WORLDBANK = "worldbank_bootstrap"
METHODS = (METHOD_PLUGIN, METHOD_DIRECT, METHOD_POINTWISE, METHOD_POINTWISE_NORMAL, METHOD_WORLDBANK)

ASSUME_LOCATION_SCALE = "assume_location_scale"
ESTIMATE_CS = "estimate_cs"
FIXED_SCALE = "fixed"
SCALE_POLICIES = (ASSUME_LOCATION_SCALE, ESTIMATE_CS, FIXED_SCALE)


@dataclass(frozen=True)
class Band:
    """Lower/center/upper curves on a probability grid, tagged with scale and method."""

    grid: ProbabilityGrid
    lower: np.ndarray
    center: np.ndarray
    upper: np.ndarray
    scale: str
    method: str
    level: float
    m: float | None = None
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        if self.scale not in SCALES:
            raise DataValidationError(f"unknown scale {self.scale!r}")
        if self.method not in METHODS:
            raise DataValidationError(f"unknown method {self.method!r}")
        if not 0.0 < self.level < 1.0:
            raise DataValidationError(f"level must lie in (0, 1), got {self.level}")
        npts = self.grid.size
        for name in ("lower", "center", "upper"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            object.__setattr__(self, name, arr)
            if arr.shape != (npts,):
                raise DataValidationError(f"{name} curve does not match the grid length {npts}")
        if np.any(self.lower > self.center) or np.any(self.center > self.upper):
            raise NumericalError("band ordering violated: need lower <= center <= upper")
        # point-wise normal-approximation intervals can leave the attainable
        # range of the target scale; record it rather than refusing the band
        extra = []
        if self.scale == SCALE_RATIO and np.any(self.lower <= 0.0):
            extra.append("ratio-scale lower limit is non-positive at some grid points")
        if self.scale == SCALE_GIC and np.any(self.lower <= -1.0):
            extra.append("gic-scale lower limit is <= -1 at some grid points")
        if extra:
            object.__setattr__(self, "warnings", tuple(self.warnings) + tuple(extra))

    @property
    def effective_trim(self) -> tuple[float, float]:
        return (self.grid.trim_lo, self.grid.trim_hi)


@dataclass(frozen=True)
class BandConfig:
    """Configuration shared by the band constructors."""

    level: float = 0.95
    rates: RateParams = RateParams()
    kernel: KernelSpec = KernelSpec()
    scale_policy: str = ASSUME_LOCATION_SCALE
    fixed_scale: float | None = None
    bootstrap_reps: int = 100
    pointwise_lognormal: bool = True

    def __post_init__(self):
        if not 0.0 < self.level < 1.0:
            raise DataValidationError(f"level must lie in (0, 1), got {self.level}")
        if self.scale_policy not in SCALE_POLICIES:
            raise DataValidationError(
                f"unknown scale policy {self.scale_policy!r}; choose from {SCALE_POLICIES}"
            )
        if self.scale_policy == FIXED_SCALE:
            if self.fixed_scale is None or not self.fixed_scale > 0.0:
                raise DataValidationError("fixed scale policy needs a positive fixed_scale")


def default_band_grid(
    n1: int, n2: int, rates: RateParams = RateParams(), size: int = 100
) -> ProbabilityGrid:
    """Equidistant evaluation grid on [trim, 1 - trim].

    The trim is the larger of n^(delta - 1/2) (the direct band's requirement,
    n = min(n1, n2)) and half the quantile-density bandwidth (so the kernel
    window stays inside (0, 1)).  The direct-band term dominates for every
    practical sample size.
    """
    n = min(int(n1), int(n2))
    if n < 2:
        raise DataValidationError("need at least 2 observations per sample")
    trim = max(float(n) ** (rates.delta - 0.5), 0.5 * float(n) ** (-rates.eta) * (1.0 + 1e-9))
    if trim >= 0.5:
        raise DataValidationError(
            f"samples too small: trimming bound {trim:g} leaves no interior grid"
        )
    return ProbabilityGrid.equidistant(size, trim, 1.0 - trim)


def plugin_half_width(
    q1_values: np.ndarray,
    q2_values: np.ndarray,
    scale: float,
    correction: float,
    n1: int,
    n2: int,
    c_alpha: float,
) -> np.ndarray:
    """(c_alpha + correction) * sqrt((n1 + s^2 n2)/(n1 n2)) * (q1/s + q2) / 2."""
    factor = math.sqrt((n1 + scale * scale * n2) / (n1 * n2))
    return (c_alpha + correction) * factor * (q1_values / scale + q2_values) / 2.0


def _resolve_scale_policy(
    cfg: BandConfig,
    s1: Sample,
    s2: Sample,
    q1: QuantileDensityEstimate,
    q2: QuantileDensityEstimate,
) -> tuple[float, float]:
    if cfg.scale_policy == FIXED_SCALE:
        return float(cfg.fixed_scale), 0.0
    scale = estimate_scale(s1, s2)
    if cfg.scale_policy == ASSUME_LOCATION_SCALE:
        return scale, 0.0
    try:
        corr = correction_bound(q1, q2, scale, s1.n, s2.n, cfg.rates)
    except NumericalError as exc:
        raise NumericalError(
            f"correction-bound estimation failed ({exc}); use the assume_location_scale "
            "policy or larger samples"
        ) from exc
    return scale, corr


def plugin_band(s1: Sample, s2: Sample, grid: ProbabilityGrid, cfg: BandConfig = BandConfig()) -> Band:
    """Simultaneous band for the log quantile ratio with estimated quantile densities."""
    q1 = kernel_quantile_density(s1, grid, cfg.kernel, cfg.rates)
    q2 = kernel_quantile_density(s2, grid, cfg.kernel, cfg.rates)
    scale, corr = _resolve_scale_policy(cfg, s1, s2, q1, q2)
    c_alpha = kolmogorov_quantile(cfg.level)
    half = plugin_half_width(q1.values, q2.values, scale, corr, s1.n, s2.n, c_alpha)
    center = log_qte_curve(s1, s2, grid)
    warns = []
    if q1.degenerate or q2.degenerate:
        warns.append("quantile density floored at degenerate grid points")
    return Band(
        grid=grid,
        lower=center - half,
        center=center,
        upper=center + half,
        scale=SCALE_LOG_QTE,
        method=METHOD_PLUGIN,
        level=cfg.level,
        warnings=tuple(warns),
    )


def direct_band(s1: Sample, s2: Sample, grid: ProbabilityGrid, cfg: BandConfig = BandConfig()) -> Band:
    """Simultaneous band from probability-shifted empirical quantiles (no smoothing)."""
    c_alpha = kolmogorov_quantile(cfg.level)
    return direct_band_at(s1, s2, grid, c_alpha, cfg.level)


def direct_band_at(
    s1: Sample, s2: Sample, grid: ProbabilityGrid, c_alpha: float, level: float
) -> Band:
    """Direct band for an explicit critical value (exposed for collapse checks)."""
    shift1 = c_alpha / math.sqrt(2.0 * s1.n)
    shift2 = c_alpha / math.sqrt(2.0 * s2.n)
    pts = grid.points
    max_shift = max(shift1, shift2)
    keep = (pts - max_shift > 0.0) & (pts + max_shift <= 1.0)
    warns: tuple[str, ...] = ()
    if not np.all(keep):
        if not np.any(keep):
            raise DataValidationError(
                f"probability shifts +/-{max_shift:g} leave (0, 1] at every grid point; "
                "the samples are too small for this level"
            )
        dropped = int(np.size(keep) - np.count_nonzero(keep))
        warns = (f"dropped {dropped} grid points whose shifted probabilities leave (0, 1]",)
        pts = pts[keep]
        grid = ProbabilityGrid(pts, float(pts[0]), float(pts[-1]))
    q2_lo = sample_quantiles(s2, pts - shift2, log_scale=True)
    q2_hi = sample_quantiles(s2, pts + shift2, log_scale=True)
    q1_lo = sample_quantiles(s1, pts - shift1, log_scale=True)
    q1_hi = sample_quantiles(s1, pts + shift1, log_scale=True)
    center = log_qte_curve(s1, s2, grid)
    return Band(
        grid=grid,
        lower=q2_lo - q1_hi,
        center=center,
        upper=q2_hi - q1_lo,
        scale=SCALE_LOG_QTE,
        method=METHOD_DIRECT,
        level=level,
        warnings=warns,
    )


def pointwise_sigma(
    p: np.ndarray, q1_values: np.ndarray, q2_values: np.ndarray, n1: int, n2: int, m: float
) -> np.ndarray:
    """Asymptotic standard deviation of log of (GIC estimate + 1) at each p."""
    var = m * m * p * (1.0 - p) * (q1_values**2 / n1 + q2_values**2 / n2)
    return np.sqrt(var)


def pointwise_covariance(
    p: float,
    p_tilde: float,
    q1_pair: tuple[float, float],
    q2_pair: tuple[float, float],
    n1: int,
    n2: int,
    m: float,
) -> float:
    """Asymptotic covariance of log(GIC+1) at p <= p_tilde (quantile densities given per point)."""
    if not p <= p_tilde:
        raise DataValidationError("covariance helper expects p <= p_tilde")
    return (
        m
        * m
        * p
        * (1.0 - p_tilde)
        * (q1_pair[0] * q1_pair[1] / n1 + q2_pair[0] * q2_pair[1] / n2)
    )


def pointwise_band(
    s1: Sample,
    s2: Sample,
    grid: ProbabilityGrid,
    cfg: BandConfig = BandConfig(),
    m: GicParams = GicParams(1.0),
) -> Band:
    """Point-wise interval for the growth incidence curve at each grid point.

    Defaults to the log-normal construction; the plain normal approximation is
    available via cfg.pointwise_lognormal = False.  Not a simultaneous band.
    """
    q1 = kernel_quantile_density(s1, grid, cfg.kernel, cfg.rates)
    q2 = kernel_quantile_density(s2, grid, cfg.kernel, cfg.rates)
    z = float(norm.ppf(0.5 + cfg.level / 2.0))
    sig = pointwise_sigma(grid.points, q1.values, q2.values, s1.n, s2.n, m.m)
    log_center = m.m * log_qte_curve(s1, s2, grid)
    center = np.exp(log_center) - 1.0
    if cfg.pointwise_lognormal:
        lower = np.exp(log_center - z * sig) - 1.0
        upper = np.exp(log_center + z * sig) - 1.0
        method = METHOD_POINTWISE
    else:
        half = z * sig * (center + 1.0)
        lower = center - half
        upper = center + half
        method = METHOD_POINTWISE_NORMAL
    warns = []
    if q1.degenerate or q2.degenerate:
        warns.append("quantile density floored at degenerate grid points")
    return Band(
        grid=grid,
        lower=lower,
        center=center,
        upper=upper,
        scale=SCALE_GIC,
        method=method,
        level=cfg.level,
        m=m.m,
        warnings=tuple(warns),
    )


def _bootstrap_quantile_rows(sample: Sample, pts: np.ndarray, reps: int, rng) -> np.ndarray:
    k_idx = quantile_indices(sample.n, pts)
    idx = rng.integers(0, sample.n, size=(reps, sample.n))
    draws = sample.values[idx]
    draws.sort(axis=1)
    return draws[:, k_idx]


def worldbank_band(
    s1: Sample,
    s2: Sample,
    grid: ProbabilityGrid,
    cfg: BandConfig = BandConfig(),
    m: GicParams = GicParams(1.0),
    rng=None,
) -> Band:
    """Bootstrap-t point-wise intervals for the growth incidence curve.

    Reproduces the toolkit-style baseline: per grid point, mean and standard
    deviation of the GIC estimate over independent with-replacement resamples
    of each sample, with critical values from the t distribution.  Point-wise
    only; used to demonstrate the lack of simultaneous coverage.
    """
    if cfg.bootstrap_reps < 50:
        raise DataValidationError(
            f"bootstrap baseline needs at least 50 replicates, got {cfg.bootstrap_reps}"
        )
    if rng is None:
        rng = np.random.default_rng()
    reps = cfg.bootstrap_reps
    pts = grid.points
    rows1 = _bootstrap_quantile_rows(s1, pts, reps, rng)
    rows2 = _bootstrap_quantile_rows(s2, pts, reps, rng)
    g_boot = np.power(rows2 / rows1, m.m) - 1.0
    boot_mean = g_boot.mean(axis=0)
    boot_sd = g_boot.std(axis=0, ddof=1)
    tcrit = float(student_t.ppf(0.5 + cfg.level / 2.0, reps - 1))
    warns = []
    collapsed = int(np.count_nonzero(boot_sd == 0.0))
    if collapsed:
        warns.append(f"bootstrap standard deviation is zero at {collapsed} grid points")
    center = gic_curve(s1, s2, grid, m)
    return Band(
        grid=grid,
        lower=boot_mean - tcrit * boot_sd,
        center=center,
        upper=boot_mean + tcrit * boot_sd,
        scale=SCALE_GIC,
        method=METHOD_WORLDBANK,
        level=cfg.level,
        m=m.m,
        warnings=tuple(warns),
    )


def _to_log_scale(band: Band) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if band.scale == SCALE_LOG_QTE:
        return band.lower, band.center, band.upper
    if band.scale == SCALE_RATIO:
        if np.any(band.lower <= 0.0):
            raise DataValidationError("ratio band has non-positive limits; cannot take logs")
        return np.log(band.lower), np.log(band.center), np.log(band.upper)
    if band.scale == SCALE_GIC:
        if band.m is None:
            raise DataValidationError("gic band lacks its annualization exponent")
        if np.any(band.lower <= -1.0):
            raise DataValidationError("gic band has limits <= -1; cannot take logs")
        return (
            np.log1p(band.lower) / band.m,
            np.log1p(band.center) / band.m,
            np.log1p(band.upper) / band.m,
        )
    raise DataValidationError(f"cannot transform a band from scale {band.scale!r}")


def transform_band(
    band: Band,
    target: str,
    m: GicParams | None = None,
    s1: Sample | None = None,
) -> Band:
    """Re-express a band on another scale via the exact monotone maps.

    qte output needs the first sample for its raw empirical quantiles; qte
    input cannot be inverted.
    """
    if target not in SCALES:
        raise DataValidationError(f"unknown target scale {target!r}")
    if target == band.scale:
        return band
    lo, ce, hi = _to_log_scale(band)
    if target == SCALE_LOG_QTE:
        return replace(band, lower=lo, center=ce, upper=hi, scale=SCALE_LOG_QTE, m=None)
    if target == SCALE_RATIO:
        return replace(band, lower=np.exp(lo), center=np.exp(ce), upper=np.exp(hi), scale=SCALE_RATIO, m=None)
    if target == SCALE_GIC:
        mm = m.m if m is not None else band.m
        if mm is None:
            raise DataValidationError("gic target needs an annualization exponent")
        return replace(
            band,
            lower=np.expm1(mm * lo),
            center=np.expm1(mm * ce),
            upper=np.expm1(mm * hi),
            scale=SCALE_GIC,
            m=mm,
        )
    # qte: Q1_hat * (ratio bounds - 1)
    if s1 is None:
        raise DataValidationError("qte target needs the first sample's raw quantiles")
    q1_raw = sample_quantiles(s1, band.grid.points)
    return replace(
        band,
        lower=q1_raw * np.expm1(lo),
        center=q1_raw * np.expm1(ce),
        upper=q1_raw * np.expm1(hi),
        scale=SCALE_QTE,
        m=None,
    )
