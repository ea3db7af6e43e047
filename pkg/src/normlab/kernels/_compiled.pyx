# cython: language_level=3
"""Compiled twin of the pure-Python kernels.

Same function set and semantics as ``normlab.kernels._python``; loops are
fused per row so small groups avoid numpy temporaries and per-call
overhead. Summations run left to right, so results can differ from the
numpy backend by roundoff.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

BACKEND_NAME = "compiled"


cdef inline double _dot(const double* a, const double* b, Py_ssize_t n) noexcept nogil:
    cdef double s = 0.0
    cdef Py_ssize_t i
    for i in range(n):
        s += a[i] * b[i]
    return s


cdef inline double _mean(const double* a, Py_ssize_t n) noexcept nogil:
    cdef double s = 0.0
    cdef Py_ssize_t i
    for i in range(n):
        s += a[i]
    return s / n


# -- forward transforms -------------------------------------------------

def fwd_wn(const double[:, ::1] w):
    cdef Py_ssize_t rows = w.shape[0], n = w.shape[1], r, i
    out_arr = np.empty((rows, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double k
    for r in range(rows):
        k = sqrt(_dot(&w[r, 0], &w[r, 0], n))
        for i in range(n):
            out[r, i] = w[r, i] / k
    return out_arr


def fwd_cwn(const double[:, ::1] w):
    cdef Py_ssize_t rows = w.shape[0], n = w.shape[1], r, i
    out_arr = np.empty((rows, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double m, s, k
    for r in range(rows):
        m = _mean(&w[r, 0], n)
        s = 0.0
        for i in range(n):
            out[r, i] = w[r, i] - m
            s += out[r, i] * out[r, i]
        k = sqrt(s)
        for i in range(n):
            out[r, i] /= k
    return out_arr


def fwd_ws(const double[:, ::1] w, double eps):
    cdef Py_ssize_t rows = w.shape[0], n = w.shape[1], r, i
    out_arr = np.empty((rows, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double m, s, d
    for r in range(rows):
        m = _mean(&w[r, 0], n)
        s = 0.0
        for i in range(n):
            out[r, i] = w[r, i] - m
            s += out[r, i] * out[r, i]
        d = sqrt(s / n) + eps
        for i in range(n):
            out[r, i] /= d
    return out_arr


# -- backward transforms -------------------------------------------------

def bwd_wn_exact(const double[:, ::1] w, const double[:, ::1] g):
    cdef Py_ssize_t rows = w.shape[0], n = w.shape[1], r, i
    out_arr = np.empty((rows, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double k2, k, ag
    for r in range(rows):
        k2 = _dot(&w[r, 0], &w[r, 0], n)
        k = sqrt(k2)
        ag = _dot(&w[r, 0], &g[r, 0], n) / k2  # dot(A, g) / k
        for i in range(n):
            out[r, i] = (g[r, i] - w[r, i] * ag) / k
    return out_arr


def bwd_wn_diag(const double[:, ::1] w, const double[:, ::1] g):
    cdef Py_ssize_t rows = w.shape[0], n = w.shape[1], r, i
    out_arr = np.empty((rows, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double k2, k
    for r in range(rows):
        k2 = _dot(&w[r, 0], &w[r, 0], n)
        k = sqrt(k2)
        for i in range(n):
            out[r, i] = g[r, i] * (1.0 - w[r, i] * w[r, i] / k2) / k
    return out_arr


def bwd_cwn_exact(const double[:, ::1] w, const double[:, ::1] g):
    cdef Py_ssize_t rows = w.shape[0], n = w.shape[1], r, i
    out_arr = np.empty((rows, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double wm, gm, s, k, ug, c
    for r in range(rows):
        wm = _mean(&w[r, 0], n)
        gm = _mean(&g[r, 0], n)
        s = 0.0
        ug = 0.0
        for i in range(n):
            c = w[r, i] - wm
            s += c * c
            ug += c * (g[r, i] - gm)
        k = sqrt(s)
        ug /= s  # dot(u, gc) / k
        for i in range(n):
            out[r, i] = ((g[r, i] - gm) - (w[r, i] - wm) * ug) / k
    return out_arr


def bwd_ws_exact(const double[:, ::1] w, const double[:, ::1] g, double eps):
    cdef Py_ssize_t rows = w.shape[0], n = w.shape[1], r, i
    out_arr = np.empty((rows, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double wm, gm, s, v, cg, d, scale, c
    for r in range(rows):
        wm = _mean(&w[r, 0], n)
        gm = _mean(&g[r, 0], n)
        s = 0.0
        cg = 0.0
        for i in range(n):
            c = w[r, i] - wm
            s += c * c
            cg += c * g[r, i]
        v = sqrt(s / n)
        d = v + eps
        scale = cg / (v * n * d)
        for i in range(n):
            out[r, i] = ((g[r, i] - gm) - (w[r, i] - wm) * scale) / d
    return out_arr


def bwd_ws_diag(const double[:, ::1] w, const double[:, ::1] g, double eps):
    cdef Py_ssize_t rows = w.shape[0], n = w.shape[1], r, i
    out_arr = np.empty((rows, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double wm, s, v, d, c
    for r in range(rows):
        wm = _mean(&w[r, 0], n)
        s = 0.0
        for i in range(n):
            c = w[r, i] - wm
            s += c * c
        v = sqrt(s / n)
        d = v + eps
        for i in range(n):
            c = w[r, i] - wm
            out[r, i] = g[r, i] * (1.0 - 1.0 / n - (c * c / n) / (d * v)) / d
    return out_arr


# -- regularizer gradients ----------------------------------------------

def l2_grad(const double[:, ::1] w, double lam):
    cdef Py_ssize_t rows = w.shape[0], n = w.shape[1], r, i
    out_arr = np.empty((rows, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    for r in range(rows):
        for i in range(n):
            out[r, i] = lam * w[r, i]
    return out_arr


def mag_shift_grad(const double[:, ::1] w, double lam, double eps):
    cdef Py_ssize_t rows = w.shape[0], n = w.shape[1], r, i
    out_arr = np.empty((rows, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double k, f
    for r in range(rows):
        k = sqrt(_dot(&w[r, 0], &w[r, 0], n))
        f = lam * (1.0 - eps / k)
        for i in range(n):
            out[r, i] = f * w[r, i]
    return out_arr


def meanstd_shift_grad(const double[:, ::1] w, double lam, double eps):
    cdef Py_ssize_t rows = w.shape[0], n = w.shape[1], r, i
    out_arr = np.empty((rows, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double m, s, v, f, c
    for r in range(rows):
        m = _mean(&w[r, 0], n)
        s = 0.0
        for i in range(n):
            c = w[r, i] - m
            s += c * c
        v = sqrt(s / n)
        f = eps / v
        for i in range(n):
            out[r, i] = lam * ((1.0 - f) * w[r, i] + f * m)
    return out_arr


# -- optimizer steps (in place, flat arrays) ----------------------------

def sgd_step(double[::1] w, const double[::1] grad, double lr):
    cdef Py_ssize_t i, n = w.shape[0]
    for i in range(n):
        w[i] -= lr * grad[i]


def momentum_step(double[::1] w, const double[::1] grad, double[::1] buf,
                  double lr, double mu):
    cdef Py_ssize_t i, n = w.shape[0]
    for i in range(n):
        buf[i] = mu * buf[i] + grad[i]
        w[i] -= lr * buf[i]


def adam_step(double[::1] w, const double[::1] grad, double[::1] m,
              double[::1] v, double lr, double beta1, double beta2,
              double eps, long t):
    cdef Py_ssize_t i, n = w.shape[0]
    cdef double bc1 = 1.0 - beta1 ** t
    cdef double bc2 = 1.0 - beta2 ** t
    cdef double mhat, vhat
    for i in range(n):
        m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i]
        v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i]
        mhat = m[i] / bc1
        vhat = v[i] / bc2
        w[i] -= lr * mhat / (sqrt(vhat) + eps)
