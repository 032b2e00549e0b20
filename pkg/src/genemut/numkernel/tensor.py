"""Dense float64 tensors with tape-based reverse-mode differentiation.

Every op returns a new :class:`Tensor`. When any input requires a gradient
the output keeps a reference to its parents and a closure mapping the output
adjoint to the parent adjoints. :func:`backward` orders the recorded nodes
topologically (the tape) and replays the closures in reverse.
"""
from __future__ import annotations

import math
from contextlib import contextmanager

import numpy as np
from scipy.special import erf

from ._backend import kernels


class DimensionError(ValueError):
    pass


class NumericalError(ArithmeticError):
    """An op produced a non-finite value."""


class DegenerateRowError(NumericalError):
    pass


class ContractError(ValueError):
    pass


class Tensor:
    __slots__ = ("data", "requires_grad", "grad", "name", "_parents", "_backward", "op")

    def __init__(self, data, requires_grad=False, name=None):
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.grad = None
        self.name = name
        self._parents = ()
        self._backward = None
        self.op = "leaf"

    @property
    def shape(self):
        return self.data.shape

    @property
    def is_leaf(self):
        return self._backward is None

    def item(self):
        return float(self.data.reshape(-1)[0])

    def numpy(self):
        return self.data.copy()

    def __repr__(self):
        tag = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}, op={self.op}{tag})"

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(self, other)

    def __neg__(self):
        return scale(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    @property
    def T(self):
        return transpose(self)


_grad_enabled = True


@contextmanager
def no_grad():
    """Build no tape inside the block (evaluation only)."""
    global _grad_enabled
    prev, _grad_enabled = _grad_enabled, False
    try:
        yield
    finally:
        _grad_enabled = prev


def as_tensor(x):
    return x if isinstance(x, Tensor) else Tensor(x)


def _result(data, parents, backward, op):
    if not np.isfinite(data).all():
        raise NumericalError(f"{op} produced a non-finite value")
    out = Tensor(data)
    out.op = op
    if _grad_enabled and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = parents
        out._backward = backward
    return out


def add(a, b):
    a, b = as_tensor(a), as_tensor(b)
    if a.shape == b.shape:
        return _result(a.data + b.data, (a, b), lambda g: (g, g), "add")
    if b.data.ndim == 0:
        return _result(a.data + b.data, (a, b), lambda g: (g, g.sum()), "add")
    if a.data.ndim == 2 and b.data.ndim == 1 and b.shape[0] == a.shape[1]:
        # row-wise bias
        return _result(a.data + b.data, (a, b), lambda g: (g, g.sum(axis=0)), "add")
    raise DimensionError(f"cannot add shapes {a.shape} and {b.shape}")


def sub(a, b):
    a, b = as_tensor(a), as_tensor(b)
    if a.shape != b.shape:
        raise DimensionError(f"cannot subtract shapes {a.shape} and {b.shape}")
    return _result(a.data - b.data, (a, b), lambda g: (g, -g), "sub")


def mul(a, b):
    """Element-wise product of equal shapes (or by a 0-d tensor / float)."""
    if not isinstance(b, Tensor) and np.ndim(b) == 0:
        return scale(a, float(b))
    a, b = as_tensor(a), as_tensor(b)
    if a.shape != b.shape:
        raise DimensionError(f"cannot multiply shapes {a.shape} and {b.shape}")
    ad, bd = a.data, b.data
    return _result(ad * bd, (a, b), lambda g: (g * bd, g * ad), "mul")


def scale(a, c):
    a = as_tensor(a)
    c = float(c)
    return _result(a.data * c, (a,), lambda g: (g * c,), "scale")


def matmul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    if a.data.ndim != 2 or b.data.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError(f"matmul shape mismatch: {a.shape} @ {b.shape}")
    ad, bd = a.data, b.data
    return _result(ad @ bd, (a, b), lambda g: (g @ bd.T, ad.T @ g), "matmul")


def transpose(a):
    a = as_tensor(a)
    if a.data.ndim != 2:
        raise DimensionError(f"transpose expects a matrix, got shape {a.shape}")
    return _result(np.ascontiguousarray(a.data.T), (a,), lambda g: (g.T,), "transpose")


def reshape(a, shape):
    a = as_tensor(a)
    old = a.shape
    return _result(a.data.reshape(shape), (a,), lambda g: (g.reshape(old),), "reshape")


def softmax_rows(m):
    """Row-wise softmax; ``-inf`` entries act as masks."""
    m = as_tensor(m)
    if m.data.ndim != 2:
        raise DimensionError(f"softmax_rows expects a matrix, got shape {m.shape}")
    if np.isnan(m.data).any() or np.isposinf(m.data).any():
        raise NumericalError("softmax_rows input contains NaN or +inf")
    try:
        y = kernels.softmax_rows(np.ascontiguousarray(m.data))
    except ValueError as exc:
        raise DegenerateRowError(str(exc)) from None
    return _result(y, (m,), lambda g: (kernels.softmax_rows_backward(y, np.ascontiguousarray(g)),),
                   "softmax_rows")


def layer_norm(m, gain, bias, eps=1e-5):
    m, gain, bias = as_tensor(m), as_tensor(gain), as_tensor(bias)
    if eps <= 0:
        raise ContractError("layer_norm eps must be positive")
    c = m.shape[1] if m.data.ndim == 2 else -1
    if m.data.ndim != 2 or gain.shape != (c,) or bias.shape != (c,):
        raise DimensionError(f"layer_norm shapes {m.shape}, {gain.shape}, {bias.shape}")
    out, xhat, rstd = kernels.layer_norm_forward(
        np.ascontiguousarray(m.data), np.ascontiguousarray(gain.data),
        np.ascontiguousarray(bias.data), float(eps))
    gd = np.ascontiguousarray(gain.data)

    def backward(g):
        return kernels.layer_norm_backward(np.ascontiguousarray(g), xhat, rstd, gd)

    return _result(out, (m, gain, bias), backward, "layer_norm")


_SQRT2 = math.sqrt(2.0)
_INV_SQRT2PI = 1.0 / math.sqrt(2.0 * math.pi)


def gelu(a):
    """Exact (erf) GELU."""
    a = as_tensor(a)
    x = a.data
    cdf = 0.5 * (1.0 + erf(x / _SQRT2))
    pdf = _INV_SQRT2PI * np.exp(-0.5 * x * x)
    return _result(x * cdf, (a,), lambda g: (g * (cdf + x * pdf),), "gelu")


def softplus(a):
    a = as_tensor(a)
    x = a.data
    out = np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))
    sig = np.exp(-np.logaddexp(0.0, -x))
    return _result(out, (a,), lambda g: (g * sig,), "softplus")


def sum(a):  # noqa: A001 - mirrors numpy naming
    a = as_tensor(a)
    shape = a.shape
    return _result(np.asarray(a.data.sum()), (a,), lambda g: (np.full(shape, float(g)),), "sum")


def mean(a):
    a = as_tensor(a)
    shape, n = a.shape, a.data.size
    return _result(np.asarray(a.data.mean()), (a,), lambda g: (np.full(shape, float(g) / n),), "mean")


def sum_rows(a):
    """Sum across columns: (r, c) -> (r,)."""
    a = as_tensor(a)
    c = a.shape[1]
    return _result(a.data.sum(axis=1), (a,), lambda g: (np.repeat(g[:, None], c, axis=1),), "sum_rows")


def mean_cols(a):
    """Column means: (r, c) -> (c,)."""
    a = as_tensor(a)
    r = a.shape[0]
    return _result(a.data.mean(axis=0), (a,), lambda g: (np.tile(g / r, (r, 1)),), "mean_cols")


def take(a, idx):
    """Gather entries of a 1-D tensor."""
    a = as_tensor(a)
    idx = np.asarray(idx, dtype=np.intp)
    n = a.shape[0]

    def backward(g):
        out = np.zeros(n)
        np.add.at(out, idx, g)
        return (out,)

    return _result(a.data[idx], (a,), backward, "take")


def concat(parts):
    """Concatenate 1-D tensors."""
    parts = [as_tensor(p) for p in parts]
    sizes = np.cumsum([p.shape[0] for p in parts])[:-1]
    return _result(np.concatenate([p.data for p in parts]), tuple(parts),
                   lambda g: tuple(np.split(g, sizes)), "concat")


def logsumexp(a):
    """Stable log-sum-exp over every entry; empty input is rejected."""
    a = as_tensor(a)
    if a.data.size == 0:
        raise ContractError("logsumexp over an empty set")
    x = a.data
    mx = x.max()
    e = np.exp(x - mx)
    s = e.sum()
    w = e / s
    return _result(np.asarray(mx + math.log(s)), (a,), lambda g: (float(g) * w,), "logsumexp")


def _topological(root):
    order, seen = [], set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if p.requires_grad and id(p) not in seen:
                stack.append((p, False))
    return order


def backward(loss):
    """Propagate adjoints from a scalar ``loss`` to every reachable leaf.

    Leaves receive ``.grad`` (overwritten, not accumulated). Intermediate
    nodes drop their closures afterwards, so a graph can be replayed once.
    Returns ``{name: grad}`` for named leaves.
    """
    if loss.data.size != 1:
        raise ContractError(f"backward needs a scalar seed, got shape {loss.shape}")
    if not loss.requires_grad:
        return {}
    tape = _topological(loss)
    grads = {id(loss): np.ones_like(loss.data)}
    named = {}
    for node in reversed(tape):
        g = grads.pop(id(node), None)
        if g is None:
            continue
        if node.is_leaf:
            node.grad = g
            if node.name is not None:
                named[node.name] = g
            continue
        pgrads = node._backward(g)
        for p, pg in zip(node._parents, pgrads):
            if not p.requires_grad:
                continue
            pg = np.asarray(pg, dtype=np.float64).reshape(p.shape)
            if id(p) in grads:
                grads[id(p)] = grads[id(p)] + pg
            else:
                grads[id(p)] = pg
        node._backward = None
        node._parents = ()
    return named
