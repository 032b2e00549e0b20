"""Central-difference verification of analytic gradients."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tensor import backward


class OracleInvalidError(RuntimeError):
    """The objective is not deterministic, so finite differences mean nothing."""


@dataclass
class EntryCheck:
    param: str
    index: tuple
    analytic: float
    numeric: float
    rel_err: float


@dataclass
class GradCheckReport:
    entries: list = field(default_factory=list)
    tol: float = 1e-4

    @property
    def max_rel_err(self):
        return max((e.rel_err for e in self.entries), default=0.0)

    @property
    def passed(self):
        return self.max_rel_err <= self.tol

    @property
    def worst(self):
        return max(self.entries, key=lambda e: e.rel_err) if self.entries else None

    def per_param(self):
        out = {}
        for e in self.entries:
            out[e.param] = max(out.get(e.param, 0.0), e.rel_err)
        return out

    def failures(self):
        return sorted({e.param for e in self.entries if e.rel_err > self.tol})

    def summary(self):
        w = self.worst
        if w is None:
            return "no entries checked"
        status = "PASS" if self.passed else "FAIL"
        return (f"{status}: max rel err {self.max_rel_err:.3e} at {w.param}{list(w.index)} "
                f"(analytic {w.analytic:.6e}, numeric {w.numeric:.6e})")


def _value(f):
    return float(np.asarray(f().data).reshape(-1)[0])


def finite_diff_check(f, params, h=1e-4, tol=1e-4, names=None):
    """Compare ``backward`` gradients of ``f()`` against central differences.

    ``f`` takes no arguments and returns a scalar tensor built from the
    tensors in ``params`` (a ParameterSet or a name->Tensor mapping), which
    are perturbed in place. Relative error per entry uses the denominator
    ``max(1, |analytic|, |numeric|)``.
    """
    if not 0 < h <= 1e-2:
        raise ValueError(f"step h={h} outside (0, 1e-2]")
    items = dict(params.items())
    if names is not None:
        items = {n: items[n] for n in names}
    loss = f()
    v0 = float(loss.data.reshape(-1)[0])
    grads = backward(loss)
    if _value(f) != v0:
        raise OracleInvalidError("objective returned different values for identical parameters")

    report = GradCheckReport(tol=tol)
    for name, t in items.items():
        analytic = grads.get(name)
        if analytic is None:
            analytic = np.zeros(t.shape)
        flat = t.data.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            fp = _value(f)
            flat[i] = orig - h
            fm = _value(f)
            flat[i] = orig
            num = (fp - fm) / (2.0 * h)
            a = float(analytic.reshape(-1)[i])
            rel = abs(a - num) / max(1.0, abs(a), abs(num))
            report.entries.append(EntryCheck(name, np.unravel_index(i, t.shape), a, num, rel))
    return report
