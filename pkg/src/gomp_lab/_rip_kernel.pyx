# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled enumeration of extreme Gram eigenvalues over column supports.

Both entry points mirror :mod:`gomp_lab._rip_fallback` exactly: same
arguments, same return tuple, same lexicographic tie rule (the first
support reaching an extreme wins).
"""

import numpy as np
from libc.math cimport sqrt, INFINITY
from scipy.linalg.cython_lapack cimport dsyev


cdef int _support_extremes(const double[:, ::1] gram, const Py_ssize_t* idx, int k,
                           double* buf, double* w, double* work, int lwork,
                           double* lo, double* hi) noexcept nogil:
    cdef int i, j, info = 0
    cdef char jobz = b'N'
    cdef char uplo = b'U'
    cdef double a, b, d, mid, rad
    if k == 1:
        lo[0] = gram[idx[0], idx[0]]
        hi[0] = lo[0]
        return 0
    if k == 2:
        a = gram[idx[0], idx[0]]
        d = gram[idx[1], idx[1]]
        b = gram[idx[0], idx[1]]
        mid = 0.5 * (a + d)
        rad = sqrt(0.25 * (a - d) * (a - d) + b * b)
        lo[0] = mid - rad
        hi[0] = mid + rad
        return 0
    for i in range(k):
        for j in range(k):
            buf[i * k + j] = gram[idx[i], idx[j]]
    dsyev(&jobz, &uplo, &k, buf, &k, w, work, &lwork, &info)
    lo[0] = w[0]
    hi[0] = w[k - 1]
    return info


def _workspace(int k):
    return np.empty(k * k), np.empty(k), np.empty(max(1, 3 * k) + 64)


def enumerate_extremes(const double[:, ::1] gram, int order):
    """Scan every size-``order`` support of ``gram`` in lexicographic order.

    Returns ``(lam_min, lam_max, argmin_support, argmax_support, count)``.
    """
    cdef Py_ssize_t n = gram.shape[0]
    if order < 1 or order > n:
        raise ValueError(f"order must be in [1, {n}], got {order}")
    cdef int k = order
    cdef Py_ssize_t[::1] c = np.arange(k, dtype=np.intp)
    cdef Py_ssize_t[::1] lo_sup = np.arange(k, dtype=np.intp)
    cdef Py_ssize_t[::1] hi_sup = np.arange(k, dtype=np.intp)
    buf_arr, w_arr, work_arr = _workspace(k)
    cdef double[::1] buf = buf_arr
    cdef double[::1] w = w_arr
    cdef double[::1] work = work_arr
    cdef int lwork = work.shape[0]
    cdef double lo = 0.0, hi = 0.0
    cdef double best_lo = INFINITY, best_hi = -INFINITY
    cdef long long count = 0
    cdef int info = 0
    cdef Py_ssize_t i, j
    with nogil:
        while True:
            info = _support_extremes(gram, &c[0], k, &buf[0], &w[0], &work[0], lwork, &lo, &hi)
            if info != 0:
                break
            count += 1
            if lo < best_lo:
                best_lo = lo
                for j in range(k):
                    lo_sup[j] = c[j]
            if hi > best_hi:
                best_hi = hi
                for j in range(k):
                    hi_sup[j] = c[j]
            i = k - 1
            while i >= 0 and c[i] == n - k + i:
                i -= 1
            if i < 0:
                break
            c[i] += 1
            for j in range(i + 1, k):
                c[j] = c[j - 1] + 1
    if info != 0:
        raise np.linalg.LinAlgError(f"dsyev failed with info={info}")
    return best_lo, best_hi, tuple(lo_sup), tuple(hi_sup), int(count)


def sampled_extremes(const double[:, ::1] gram, const Py_ssize_t[:, ::1] supports):
    """Same as :func:`enumerate_extremes` over the given rows of supports."""
    cdef Py_ssize_t rows = supports.shape[0]
    cdef int k = supports.shape[1]
    if rows < 1 or k < 1:
        raise ValueError("supports must be a non-empty 2-d array")
    cdef Py_ssize_t[::1] lo_sup = np.array(supports[0], dtype=np.intp)
    cdef Py_ssize_t[::1] hi_sup = np.array(supports[0], dtype=np.intp)
    buf_arr, w_arr, work_arr = _workspace(k)
    cdef double[::1] buf = buf_arr
    cdef double[::1] w = w_arr
    cdef double[::1] work = work_arr
    cdef int lwork = work.shape[0]
    cdef double lo = 0.0, hi = 0.0
    cdef double best_lo = INFINITY, best_hi = -INFINITY
    cdef int info = 0
    cdef Py_ssize_t r, j
    with nogil:
        for r in range(rows):
            info = _support_extremes(gram, &supports[r, 0], k, &buf[0], &w[0], &work[0],
                                     lwork, &lo, &hi)
            if info != 0:
                break
            if lo < best_lo:
                best_lo = lo
                for j in range(k):
                    lo_sup[j] = supports[r, j]
            if hi > best_hi:
                best_hi = hi
                for j in range(k):
                    hi_sup[j] = supports[r, j]
    if info != 0:
        raise np.linalg.LinAlgError(f"dsyev failed with info={info}")
    return best_lo, best_hi, tuple(lo_sup), tuple(hi_sup), int(rows)
