"""Numpy implementations of the hot kernels.

Used when the compiled ``_ckernels`` extension is unavailable or when
``GENEMUT_PURE_PYTHON=1`` is set. Signatures mirror the Cython module.
"""
import numpy as np


def softmax_rows(x):
    mx = x.max(axis=1, keepdims=True)
    bad = np.flatnonzero(np.isneginf(mx[:, 0]))
    if bad.size:
        raise ValueError(f"degenerate row {int(bad[0])}: all entries are -inf")
    e = np.exp(x - mx)
    return e / e.sum(axis=1, keepdims=True)


def softmax_rows_backward(y, gy):
    return y * (gy - (gy * y).sum(axis=1, keepdims=True))


def layer_norm_forward(x, gain, bias, eps):
    mean = x.mean(axis=1, keepdims=True)
    xc = x - mean
    var = (xc * xc).mean(axis=1, keepdims=True)
    rstd = 1.0 / np.sqrt(var + eps)
    xhat = xc * rstd
    return xhat * gain + bias, xhat, rstd[:, 0]


def layer_norm_backward(gy, xhat, rstd, gain):
    gxhat = gy * gain
    c = xhat.shape[1]
    gx = rstd[:, None] * (
        gxhat
        - gxhat.sum(axis=1, keepdims=True) / c
        - xhat * (gxhat * xhat).sum(axis=1, keepdims=True) / c
    )
    return gx, (gy * xhat).sum(axis=0), gy.sum(axis=0)


def adam_update(p, g, m, v, lr, beta1, beta2, eps, bc1, bc2, l2_weight):
    """In-place Adam step on flat float64 buffers."""
    m *= beta1
    m += (1.0 - beta1) * g
    v *= beta2
    v += (1.0 - beta2) * g * g
    p -= lr * ((m / bc1) / (np.sqrt(v / bc2) + eps) + l2_weight * p)
