# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled BCJR forward-backward kernel."""
import numpy as np
cimport numpy as cnp

from .errors import NumericalError

cnp.import_array()


cdef int _forward(const double[:, ::1] v, double[:, ::1] alpha) noexcept nogil:
    cdef Py_ssize_t T = v.shape[0], n = v.shape[1], t, s, p
    cdef Py_ssize_t mask = n - 1
    cdef double total, inv = 1.0 / n
    for t in range(T):
        total = 0.0
        for s in range(n):
            p = (s << 1) & mask
            if t == 0:
                alpha[t, s] = v[t, s] * inv
            else:
                alpha[t, s] = 0.5 * v[t, s] * (alpha[t - 1, p] + alpha[t - 1, p | 1])
            total += alpha[t, s]
        if not total > 0.0 or total != total or total > 1.7976931348623157e308:
            return <int>t
        for s in range(n):
            alpha[t, s] /= total
    return -1


cdef int _backward(const double[:, ::1] v, double[:, ::1] beta) noexcept nogil:
    cdef Py_ssize_t T = v.shape[0], n = v.shape[1], t, s, lo
    cdef Py_ssize_t half = n >> 1
    cdef double total
    for s in range(n):
        beta[T - 1, s] = 1.0 / n
    for t in range(T - 2, -1, -1):
        total = 0.0
        for s in range(n):
            lo = s >> 1
            beta[t, s] = 0.5 * (v[t + 1, lo] * beta[t + 1, lo]
                                + v[t + 1, lo | half] * beta[t + 1, lo | half])
            total += beta[t, s]
        if not total > 0.0 or total != total or total > 1.7976931348623157e308:
            return <int>t
        for s in range(n):
            beta[t, s] /= total
    return -1


cdef int _posteriors(double[:, ::1] alpha, double[:, ::1] beta, double[:, ::1] post) noexcept nogil:
    cdef Py_ssize_t T = alpha.shape[0], n = alpha.shape[1], t, s
    cdef Py_ssize_t half = n >> 1
    cdef double neg, pos, total
    for t in range(T):
        neg = 0.0
        pos = 0.0
        for s in range(half):
            neg += alpha[t, s] * beta[t, s]
        for s in range(half, n):
            pos += alpha[t, s] * beta[t, s]
        total = neg + pos
        if not total > 0.0:
            return <int>t
        post[t, 0] = neg / total
        post[t, 1] = pos / total
    return -1


def forward(values):
    cdef const double[:, ::1] v = np.ascontiguousarray(values, dtype=np.float64)
    alpha = np.empty((v.shape[0], v.shape[1]))
    cdef double[:, ::1] a = alpha
    cdef int bad
    with nogil:
        bad = _forward(v, a)
    if bad >= 0:
        raise NumericalError(f"forward message at t={bad} vanished")
    return alpha


def backward(values):
    cdef const double[:, ::1] v = np.ascontiguousarray(values, dtype=np.float64)
    beta = np.empty((v.shape[0], v.shape[1]))
    cdef double[:, ::1] b = beta
    cdef int bad
    with nogil:
        bad = _backward(v, b)
    if bad >= 0:
        raise NumericalError(f"backward message at t={bad} vanished")
    return beta


def posteriors(alpha, beta):
    cdef double[:, ::1] a = np.ascontiguousarray(alpha, dtype=np.float64)
    cdef double[:, ::1] b = np.ascontiguousarray(beta, dtype=np.float64)
    post = np.empty((a.shape[0], 2))
    cdef double[:, ::1] p = post
    cdef int bad
    with nogil:
        bad = _posteriors(a, b, p)
    if bad >= 0:
        raise NumericalError(f"posterior accumulation vanished at t={bad}")
    return post


def run(values):
    cdef const double[:, ::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef Py_ssize_t T = v.shape[0], n = v.shape[1]
    alpha = np.empty((T, n))
    beta = np.empty((T, n))
    post = np.empty((T, 2))
    cdef double[:, ::1] a = alpha
    cdef double[:, ::1] b = beta
    cdef double[:, ::1] p = post
    cdef int bad_f, bad_b, bad_p = -1
    with nogil:
        bad_f = _forward(v, a)
        bad_b = _backward(v, b)
        if bad_f < 0 and bad_b < 0:
            bad_p = _posteriors(a, b, p)
    if bad_f >= 0:
        raise NumericalError(f"forward message at t={bad_f} vanished")
    if bad_b >= 0:
        raise NumericalError(f"backward message at t={bad_b} vanished")
    if bad_p >= 0:
        raise NumericalError(f"posterior accumulation vanished at t={bad_p}")
    return alpha, beta, post
