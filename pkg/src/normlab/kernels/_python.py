"""Vectorized numpy implementation of the hot kernels.

Every function treats the rows of ``W`` as independent normalized groups.
Shapes: ``W`` and ``G`` are (rows, n); optimizer steps operate on flat
float64 arrays in place. Degeneracy checks (zero norms, zero spread) are
the caller's job; these kernels assume valid inputs.
"""

import numpy as np

BACKEND_NAME = "python"


def _row_norms(w):
    return np.sqrt(np.einsum("ij,ij->i", w, w))[:, None]


def _row_centered(w):
    return w - w.mean(axis=1, keepdims=True)


# -- forward transforms -------------------------------------------------

def fwd_wn(w):
    return w / _row_norms(w)


def fwd_cwn(w):
    c = _row_centered(w)
    return c / _row_norms(c)


def fwd_ws(w, eps):
    c = _row_centered(w)
    n = w.shape[1]
    v = np.sqrt(np.einsum("ij,ij->i", c, c) / n)[:, None]
    return c / (v + eps)


# -- backward transforms (vector-Jacobian products) ---------------------

def bwd_wn_exact(w, g):
    k = _row_norms(w)
    a = w / k
    return (g - a * np.einsum("ij,ij->i", a, g)[:, None]) / k


def bwd_wn_diag(w, g):
    k = _row_norms(w)
    return g * (1.0 - (w * w) / (k * k)) / k


def bwd_cwn_exact(w, g):
    c = _row_centered(w)
    k = _row_norms(c)
    u = c / k
    gc = g - g.mean(axis=1, keepdims=True)
    return (gc - u * np.einsum("ij,ij->i", u, gc)[:, None]) / k


def bwd_ws_exact(w, g, eps):
    c = _row_centered(w)
    n = w.shape[1]
    v = np.sqrt(np.einsum("ij,ij->i", c, c) / n)[:, None]
    gc = g - g.mean(axis=1, keepdims=True)
    cg = np.einsum("ij,ij->i", c, g)[:, None]
    return (gc - c * cg / (v * n * (v + eps))) / (v + eps)


def bwd_ws_diag(w, g, eps):
    c = _row_centered(w)
    n = w.shape[1]
    v = np.sqrt(np.einsum("ij,ij->i", c, c) / n)[:, None]
    factor = (1.0 - 1.0 / n - (c * c / n) / ((v + eps) * v)) / (v + eps)
    return g * factor


# -- regularizer gradients ----------------------------------------------

def l2_grad(w, lam):
    return lam * w


def mag_shift_grad(w, lam, eps):
    k = _row_norms(w)
    return lam * (1.0 - eps / k) * w


def meanstd_shift_grad(w, lam, eps):
    n = w.shape[1]
    m = w.mean(axis=1, keepdims=True)
    c = w - m
    v = np.sqrt(np.einsum("ij,ij->i", c, c) / n)[:, None]
    return lam * ((1.0 - eps / v) * w + (eps / v) * m)


# -- optimizer steps (in place, flat arrays) ----------------------------

def sgd_step(w, grad, lr):
    w -= lr * grad


def momentum_step(w, grad, buf, lr, mu):
    buf *= mu
    buf += grad
    w -= lr * buf


def adam_step(w, grad, m, v, lr, beta1, beta2, eps, t):
    # t is the 1-based count of this update, used for bias correction.
    m *= beta1
    m += (1.0 - beta1) * grad
    v *= beta2
    v += (1.0 - beta2) * grad * grad
    mhat = m / (1.0 - beta1 ** t)
    vhat = v / (1.0 - beta2 ** t)
    w -= lr * mhat / (np.sqrt(vhat) + eps)
