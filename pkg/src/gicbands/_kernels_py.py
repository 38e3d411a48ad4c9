"""NumPy implementations of the hot kernels.

This module mirrors the API of the compiled extension ``gicbands._kernels``
and is selected automatically when the extension is unavailable (or when
``GICBANDS_PURE_PYTHON=1`` is set).  Semantics must match the compiled
versions: exactly for quantile selection, to tight floating-point tolerance
for the kernel sums (summation order differs).  Agreement is enforced in
tests/test_backends.py.

Kernel codes: 0 = Epanechnikov on [-1/2, 1/2], 1 = uniform on [-1/2, 1/2],
2 = Epanechnikov on [-1, 1].
"""

import numpy as np

BACKEND = "python"

EPANECHNIKOV_HALF = 0
UNIFORM_HALF = 1
EPANECHNIKOV_UNIT = 2

_SUPPORT_RADIUS = {EPANECHNIKOV_HALF: 0.5, UNIFORM_HALF: 0.5, EPANECHNIKOV_UNIT: 1.0}


def _kernel_weights(u, code):
    if code == EPANECHNIKOV_HALF:
        # 2 * K_epa(2u): integrates to 1 on [-1/2, 1/2], zero first moment
        return 1.5 - 6.0 * u * u
    if code == UNIFORM_HALF:
        return np.ones_like(u)
    if code == EPANECHNIKOV_UNIT:
        return 0.75 * (1.0 - u * u)
    raise ValueError(f"unknown kernel code {code}")


def quantile_values(sorted_values, probs):
    """Order statistic X_(k) for each p, with k the index satisfying
    (k-1)/n < p <= k/n under float comparison."""
    x = np.ascontiguousarray(sorted_values, dtype=np.float64)
    p = np.atleast_1d(np.asarray(probs, dtype=np.float64))
    n = x.shape[0]
    k = np.ceil(n * p).astype(np.int64)
    np.clip(k, 1, n, out=k)
    # repair one-off rounding of ceil(n*p) so the defining inequalities hold
    # under the same float arithmetic a direct scan would use
    dec = (k > 1) & ((k - 1) / n >= p)
    k[dec] -= 1
    inc = (k < n) & (k / n < p)
    k[inc] += 1
    return x[k - 1]


def quantile_density(sorted_values, probs, h, code):
    """Convolution of the kernel with the empirical quantile jumps:
    h^-1 * sum_k K((p - k/n)/h) * (x_(k+1) - x_(k)),  k = 1..n-1."""
    x = np.ascontiguousarray(sorted_values, dtype=np.float64)
    p = np.atleast_1d(np.asarray(probs, dtype=np.float64))
    n = x.shape[0]
    jumps = np.diff(x)
    locs = np.arange(1, n, dtype=np.float64) / n
    radius = _SUPPORT_RADIUS[code] * h
    out = np.empty(p.shape[0], dtype=np.float64)
    for i, pi in enumerate(p):
        lo = np.searchsorted(locs, pi - radius, side="left")
        hi = np.searchsorted(locs, pi + radius, side="right")
        u = (pi - locs[lo:hi]) / h
        out[i] = _kernel_weights(u, code) @ jumps[lo:hi] / h
    return out


def pair_kernel_sum(sorted_values, h, code):
    """sum_{i != l} K((x_i - x_l)/h) over all ordered pairs of a sorted sample."""
    x = np.ascontiguousarray(sorted_values, dtype=np.float64)
    n = x.shape[0]
    radius = _SUPPORT_RADIUS[code] * h
    hi = np.searchsorted(x, x + radius, side="right")
    starts = np.arange(n, dtype=np.int64) + 1
    counts = np.maximum(hi - starts, 0)
    total = int(counts.sum())
    if total == 0:
        return 0.0
    offsets = np.concatenate(([0], np.cumsum(counts)[:-1]))
    ii = np.repeat(np.arange(n, dtype=np.int64), counts)
    jj = np.arange(total, dtype=np.int64) - np.repeat(offsets, counts) + np.repeat(starts, counts)
    u = (x[jj] - x[ii]) / h
    # i < j pairs only; double for the symmetric sum
    return 2.0 * float(np.sum(_kernel_weights(u, code)))
