# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled Gram assembly for the closed-form kernel families.

Every entry is computed independently in a fixed loop order, so the output
does not depend on how rows are partitioned.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, sqrt, floor

cnp.import_array()

DEF GAUSSIAN = 0
DEF LAPLACE = 1
DEF BROWNIAN = 2
DEF CONSTANT = 3
DEF BLOCK = 4


cdef inline long _block_of(double x0, long nblocks) noexcept nogil:
    cdef double k = floor(x0 / 2.0)
    if k < 0 or k >= nblocks:
        return -1
    if x0 - 2.0 * k >= 1.0:
        return -1
    return <long>k


cdef inline double _entry(int family, const double[::1] params,
                          const double[:, ::1] X, const double[:, ::1] Y,
                          Py_ssize_t i, Py_ssize_t j) noexcept nogil:
    cdef Py_ssize_t k, d = X.shape[1]
    cdef double acc, diff, a, b
    cdef long bi, bj, nb
    if family == GAUSSIAN:
        acc = 0.0
        for k in range(d):
            diff = X[i, k] - Y[j, k]
            acc += diff * diff
        return exp(-acc / (2.0 * params[0] * params[0]))
    elif family == LAPLACE:
        acc = 0.0
        for k in range(d):
            diff = X[i, k] - Y[j, k]
            acc += diff * diff
        return exp(-sqrt(acc) / params[0])
    elif family == BROWNIAN:
        acc = 1.0
        for k in range(d):
            a = X[i, k]
            b = Y[j, k]
            acc *= a if a < b else b
        return acc
    elif family == CONSTANT:
        return params[0]
    else:
        nb = <long>params[0]
        bi = _block_of(X[i, 0], nb)
        bj = _block_of(Y[j, 0], nb)
        if bi < 0 or bi != bj:
            return 0.0
        return params[1 + bi] * params[1 + bi] / params[1 + nb + bi]


def gram_closed_form(int family, params, X, Y):
    """Cross Gram ``out[i, j] = k(X[i], Y[j])`` for a family code."""
    cdef const double[::1] p = np.ascontiguousarray(params, dtype=np.float64)
    cdef const double[:, ::1] xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef const double[:, ::1] yv = np.ascontiguousarray(Y, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0], m = yv.shape[0], i, j
    out = np.empty((n, m), dtype=np.float64)
    cdef double[:, ::1] ov = out
    if family == BLOCK:
        _block_gram(p, xv, yv, ov)
        return out
    with nogil:
        for i in range(n):
            for j in range(m):
                ov[i, j] = _entry(family, p, xv, yv, i, j)
    return out


cdef void _block_gram(const double[::1] p, const double[:, ::1] X, const double[:, ::1] Y,
                      double[:, ::1] out):
    cdef Py_ssize_t n = X.shape[0], m = Y.shape[0], i, j
    cdef long nb = <long>p[0], bi
    cdef double val
    cdef long[::1] by = np.empty(m, dtype=np.int_)
    with nogil:
        for j in range(m):
            by[j] = _block_of(Y[j, 0], nb)
        for i in range(n):
            bi = _block_of(X[i, 0], nb)
            val = p[1 + bi] * p[1 + bi] / p[1 + nb + bi] if bi >= 0 else 0.0
            for j in range(m):
                out[i, j] = val if (bi >= 0 and by[j] == bi) else 0.0


def diag_closed_form(int family, params, X):
    """Diagonal ``out[i] = k(X[i], X[i])``."""
    cdef const double[::1] p = np.ascontiguousarray(params, dtype=np.float64)
    cdef const double[:, ::1] xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0], i
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out
    with nogil:
        for i in range(n):
            ov[i] = _entry(family, p, xv, xv, i, i)
    return out
