# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: order-statistic selection, the quantile-density
convolution sum, and the pairwise kernel sum used by the scale estimator.

Same API and kernel codes as gicbands._kernels_py.
"""

from libc.math cimport ceil

import numpy as np

BACKEND = "cython"

EPANECHNIKOV_HALF = 0
UNIFORM_HALF = 1
EPANECHNIKOV_UNIT = 2


cdef inline double _kernel_weight(double u, int code) noexcept nogil:
    if code == 0:
        return 1.5 - 6.0 * u * u
    elif code == 1:
        return 1.0
    return 0.75 * (1.0 - u * u)


cdef inline double _support_radius(int code) noexcept nogil:
    return 0.5 if code <= 1 else 1.0


def quantile_values(double[::1] sorted_values, probs):
    """Order statistic X_(k) for each p, with (k-1)/n < p <= k/n in float."""
    p_arr = np.atleast_1d(np.asarray(probs, dtype=np.float64))
    cdef double[::1] p = np.ascontiguousarray(p_arr)
    cdef Py_ssize_t n = sorted_values.shape[0]
    cdef Py_ssize_t m = p.shape[0]
    out_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i
    cdef long long k
    cdef double dn = <double> n
    with nogil:
        for i in range(m):
            k = <long long> ceil(dn * p[i])
            if k < 1:
                k = 1
            elif k > n:
                k = n
            if k > 1 and (k - 1) / dn >= p[i]:
                k -= 1
            elif k < n and k / dn < p[i]:
                k += 1
            out[i] = sorted_values[k - 1]
    return out_arr


def quantile_density(double[::1] sorted_values, probs, double h, int code):
    """h^-1 * sum_k K((p - k/n)/h) * (x_(k+1) - x_(k)) over k = 1..n-1."""
    p_arr = np.atleast_1d(np.asarray(probs, dtype=np.float64))
    cdef double[::1] p = np.ascontiguousarray(p_arr)
    cdef Py_ssize_t n = sorted_values.shape[0]
    cdef Py_ssize_t m = p.shape[0]
    out_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double radius = _support_radius(code) * h
    cdef double dn = <double> n
    cdef Py_ssize_t i, k, k_lo, k_hi
    cdef double pi, acc, u, loc
    with nogil:
        for i in range(m):
            pi = p[i]
            # jump locations k/n, k = 1..n-1; restrict to |pi - k/n| <= radius
            k_lo = <Py_ssize_t> ceil((pi - radius) * dn)
            if k_lo < 1:
                k_lo = 1
            while k_lo > 1 and (k_lo - 1) / dn >= pi - radius:
                k_lo -= 1
            while k_lo <= n - 1 and k_lo / dn < pi - radius:
                k_lo += 1
            acc = 0.0
            k = k_lo
            while k <= n - 1:
                loc = k / dn
                if loc > pi + radius:
                    break
                u = (pi - loc) / h
                acc += _kernel_weight(u, code) * (sorted_values[k] - sorted_values[k - 1])
                k += 1
            out[i] = acc / h
    return out_arr


def pair_kernel_sum(double[::1] sorted_values, double h, int code):
    """sum_{i != l} K((x_i - x_l)/h) over all ordered pairs of a sorted sample."""
    cdef Py_ssize_t n = sorted_values.shape[0]
    cdef double radius = _support_radius(code) * h
    cdef double acc = 0.0
    cdef Py_ssize_t i, j
    cdef double xi, u
    with nogil:
        for i in range(n - 1):
            xi = sorted_values[i]
            j = i + 1
            while j < n and sorted_values[j] <= xi + radius:
                u = (sorted_values[j] - xi) / h
                acc += _kernel_weight(u, code)
                j += 1
    return 2.0 * acc
