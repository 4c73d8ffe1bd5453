# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: peak prominence scan and Spearman rho.

Mirrors ``_pykernels``; keep the two implementations in lockstep.
"""

import numpy as np

cimport numpy as cnp

IMPLEMENTATION = "cython"


def local_maxima_prominences(signal):
    """All interior local maxima with their topographic prominences.

    Plateaus report their leftmost index; boundary samples never qualify.
    Returns (indices, prominences).
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x = np.ascontiguousarray(signal, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] idx_buf = np.empty(n, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] prom_buf = np.empty(n, dtype=np.float64)
    cdef Py_ssize_t count = 0
    cdef Py_ssize_t i = 1, j, k
    cdef double left_min, right_min, base

    while i < n - 1:
        if x[i] <= x[i - 1]:
            i += 1
            continue
        j = i
        while j + 1 < n and x[j + 1] == x[i]:
            j += 1
        if j + 1 < n and x[j + 1] < x[i]:
            left_min = x[i]
            k = i - 1
            while k >= 0 and x[k] <= x[i]:
                if x[k] < left_min:
                    left_min = x[k]
                k -= 1
            right_min = x[i]
            k = j + 1
            while k < n and x[k] <= x[i]:
                if x[k] < right_min:
                    right_min = x[k]
                k += 1
            base = left_min if left_min > right_min else right_min
            idx_buf[count] = i
            prom_buf[count] = x[i] - base
            count += 1
        i = j + 1
    return idx_buf[:count].copy(), prom_buf[:count].copy()


cdef void _midrank_into(cnp.float64_t[:] x, cnp.int64_t[:] order,
                        cnp.float64_t[:] ranks) nogil:
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t i = 0, j, k
    cdef double avg
    while i < n:
        j = i
        while j + 1 < n and x[order[j + 1]] == x[order[i]]:
            j += 1
        avg = 0.5 * (i + j) + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1


def midrank(values):
    """Average ranks (1-based) with mid-ranks for ties."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x = np.ascontiguousarray(values, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] order = np.argsort(x, kind="stable")
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ranks = np.empty(x.shape[0], dtype=np.float64)
    _midrank_into(x, order, ranks)
    return ranks


def spearman_rho(xs, ys):
    """Spearman rho as Pearson correlation of mid-ranks; nan if constant."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x = np.ascontiguousarray(xs, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] y = np.ascontiguousarray(ys, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] ox = np.argsort(x, kind="stable")
    cdef cnp.ndarray[cnp.int64_t, ndim=1] oy = np.argsort(y, kind="stable")
    cdef cnp.ndarray[cnp.float64_t, ndim=1] rx = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ry = np.empty(n, dtype=np.float64)
    _midrank_into(x, ox, rx)
    _midrank_into(y, oy, ry)

    cdef double mx = 0.0, my = 0.0
    cdef Py_ssize_t i
    for i in range(n):
        mx += rx[i]
        my += ry[i]
    mx /= n
    my /= n
    cdef double sxy = 0.0, sxx = 0.0, syy = 0.0, dx, dy
    for i in range(n):
        dx = rx[i] - mx
        dy = ry[i] - my
        sxy += dx * dy
        sxx += dx * dx
        syy += dy * dy
    cdef double denom = (sxx * syy) ** 0.5
    if denom == 0.0:
        return float("nan")
    return sxy / denom
