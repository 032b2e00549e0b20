# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: row softmax, layer norm, fused Adam."""
import numpy as np
from libc.math cimport exp, sqrt, INFINITY


def softmax_rows(const double[:, ::1] x):
    cdef Py_ssize_t r = x.shape[0], c = x.shape[1], i, j
    out = np.empty((r, c), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef double mx, s, e
    for i in range(r):
        mx = -INFINITY
        for j in range(c):
            if x[i, j] > mx:
                mx = x[i, j]
        if mx == -INFINITY:
            raise ValueError(f"degenerate row {i}: all entries are -inf")
        s = 0.0
        for j in range(c):
            e = exp(x[i, j] - mx)
            o[i, j] = e
            s += e
        for j in range(c):
            o[i, j] = o[i, j] / s
    return out


def softmax_rows_backward(const double[:, ::1] y, const double[:, ::1] gy):
    cdef Py_ssize_t r = y.shape[0], c = y.shape[1], i, j
    out = np.empty((r, c), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef double dot
    for i in range(r):
        dot = 0.0
        for j in range(c):
            dot += gy[i, j] * y[i, j]
        for j in range(c):
            o[i, j] = y[i, j] * (gy[i, j] - dot)
    return out


def layer_norm_forward(const double[:, ::1] x, const double[::1] gain,
                       const double[::1] bias, double eps):
    cdef Py_ssize_t r = x.shape[0], c = x.shape[1], i, j
    out = np.empty((r, c), dtype=np.float64)
    xhat = np.empty((r, c), dtype=np.float64)
    rstd = np.empty(r, dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef double[:, ::1] xh = xhat
    cdef double[::1] rs = rstd
    cdef double mean, var, d, inv
    for i in range(r):
        mean = 0.0
        for j in range(c):
            mean += x[i, j]
        mean /= c
        var = 0.0
        for j in range(c):
            d = x[i, j] - mean
            var += d * d
        var /= c
        inv = 1.0 / sqrt(var + eps)
        rs[i] = inv
        for j in range(c):
            d = (x[i, j] - mean) * inv
            xh[i, j] = d
            o[i, j] = d * gain[j] + bias[j]
    return out, xhat, rstd


def layer_norm_backward(const double[:, ::1] gy, const double[:, ::1] xhat,
                        const double[::1] rstd, const double[::1] gain):
    cdef Py_ssize_t r = gy.shape[0], c = gy.shape[1], i, j
    gx = np.empty((r, c), dtype=np.float64)
    ggain = np.zeros(c, dtype=np.float64)
    gbias = np.zeros(c, dtype=np.float64)
    cdef double[:, ::1] gxv = gx
    cdef double[::1] gg = ggain
    cdef double[::1] gb = gbias
    cdef double s1, s2, gxh
    for i in range(r):
        s1 = 0.0
        s2 = 0.0
        for j in range(c):
            gxh = gy[i, j] * gain[j]
            s1 += gxh
            s2 += gxh * xhat[i, j]
            gg[j] += gy[i, j] * xhat[i, j]
            gb[j] += gy[i, j]
        s1 /= c
        s2 /= c
        for j in range(c):
            gxv[i, j] = rstd[i] * (gy[i, j] * gain[j] - s1 - xhat[i, j] * s2)
    return gx, ggain, gbias


def adam_update(double[::1] p, const double[::1] g, double[::1] m, double[::1] v,
                double lr, double beta1, double beta2, double eps,
                double bc1, double bc2, double l2_weight):
    """In-place Adam step on flat float64 buffers."""
    cdef Py_ssize_t n = p.shape[0], i
    cdef double gi
    for i in range(n):
        gi = g[i]
        m[i] = beta1 * m[i] + (1.0 - beta1) * gi
        v[i] = beta2 * v[i] + (1.0 - beta2) * gi * gi
        p[i] -= lr * ((m[i] / bc1) / (sqrt(v[i] / bc2) + eps) + l2_weight * p[i])
