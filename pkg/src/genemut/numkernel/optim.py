from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._backend import kernels


class PoisonedStepError(FloatingPointError):
    pass


@dataclass
class AdamState:
    """Moment buffers for a :class:`ParameterSet` plus hyperparameters.

    ``l2_weight`` is applied as decoupled weight decay inside the update,
    never through the loss graph.
    """
    size: int
    lr: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    l2_weight: float = 1e-5
    step: int = 0
    m: np.ndarray = field(default=None, repr=False)
    v: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.m is None:
            self.m = np.zeros(self.size)
        if self.v is None:
            self.v = np.zeros(self.size)


def adam_step(state, params, grads):
    """Apply one bias-corrected Adam update in place and return ``params``.

    ``grads`` is either a flat vector or a ``{name: grad}`` mapping; names
    without a gradient get zero. Any non-finite gradient aborts the step
    before anything is mutated.
    """
    g = grads if isinstance(grads, np.ndarray) else params.flat_grad(grads)
    if g.shape != params.flat.shape:
        raise ValueError(f"gradient size {g.shape} does not match parameters {params.flat.shape}")
    if not np.isfinite(g).all():
        bad = int(np.flatnonzero(~np.isfinite(g))[0])
        owner = next((n for n in params.names() if params.slice_of(n).start <= bad < params.slice_of(n).stop), "?")
        raise PoisonedStepError(f"non-finite gradient in parameter {owner!r}; step skipped")
    t = state.step + 1
    kernels.adam_update(params.flat, np.ascontiguousarray(g), state.m, state.v,
                        state.lr, state.beta1, state.beta2, state.eps,
                        1.0 - state.beta1 ** t, 1.0 - state.beta2 ** t, state.l2_weight)
    state.step = t
    return params
