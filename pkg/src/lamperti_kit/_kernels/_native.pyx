# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled twins of the path kernels in `_fallback`.

Single-pass loops over the path grids; the heavy per-path work of the time
change (clock integration and monotone inversion) lives here.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "native"


def trapezoid_cumsum(object x_obj, object w_obj):
    """Cumulative trapezoid integral of samples w over abscissae x; out[0] = 0."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x = np.ascontiguousarray(x_obj, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w = np.ascontiguousarray(w_obj, dtype=np.float64)
    cdef Py_ssize_t m = x.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(m, dtype=np.float64)
    cdef Py_ssize_t i
    cdef double acc = 0.0
    out[0] = 0.0
    for i in range(1, m):
        acc = acc + 0.5 * (w[i] + w[i - 1]) * (x[i] - x[i - 1])
        out[i] = acc
    return out


cdef inline double _lerp(double qi, const double[::1] xp, const double[::1] fp,
                         Py_ssize_t j, Py_ssize_t m) nogil:
    cdef double x0, dx, theta
    if j < 0:
        j = 0
    elif j > m - 2:
        j = m - 2
    x0 = xp[j]
    dx = xp[j + 1] - x0
    if dx > 0.0:
        theta = (qi - x0) / dx
    else:
        theta = 1.0
    if theta < 0.0:
        theta = 0.0
    elif theta > 1.0:
        theta = 1.0
    return fp[j] * (1.0 - theta) + fp[j + 1] * theta


def interp_right(object q_obj, object xp_obj, object fp_obj):
    """Piecewise-linear interpolation, right-continuous at duplicated knots.

    Sorted queries (the common case: monotone clock inversions) take a
    single merge walk over the knots; unsorted queries fall back to a
    per-query binary search.
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=1] q = np.ascontiguousarray(np.atleast_1d(q_obj), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xp_arr = np.ascontiguousarray(xp_obj, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] fp_arr = np.ascontiguousarray(fp_obj, dtype=np.float64)
    cdef const double[::1] xp = xp_arr
    cdef const double[::1] fp = fp_arr
    cdef Py_ssize_t m = xp.shape[0]
    cdef Py_ssize_t nq = q.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(nq, dtype=np.float64)
    cdef Py_ssize_t k, lo, hi, mid, j
    cdef double qi
    cdef bint sorted_q = True
    for k in range(1, nq):
        if q[k] < q[k - 1]:
            sorted_q = False
            break
    if sorted_q:
        j = 0
        for k in range(nq):
            qi = q[k]
            while j + 1 < m and xp[j + 1] <= qi:
                j += 1
            out[k] = _lerp(qi, xp, fp, j, m)
    else:
        for k in range(nq):
            qi = q[k]
            lo = 0
            hi = m
            while lo < hi:
                mid = (lo + hi) >> 1
                if xp[mid] <= qi:
                    lo = mid + 1
                else:
                    hi = mid
            out[k] = _lerp(qi, xp, fp, lo - 1, m)
    return out


def first_nonpositive(object w_obj):
    """Index of the first entry <= 0, or -1 when all entries are positive."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w = np.ascontiguousarray(w_obj, dtype=np.float64)
    cdef Py_ssize_t i
    for i in range(w.shape[0]):
        if w[i] <= 0.0:
            return i
    return -1
