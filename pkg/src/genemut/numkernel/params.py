"""Named parameters backed by one contiguous buffer."""
from __future__ import annotations

import zlib

import numpy as np

from .tensor import Tensor


def param_seed(seed, name):
    """Stable per-parameter seed: same (run seed, name) -> same stream."""
    return np.random.SeedSequence([int(seed), zlib.crc32(name.encode())])


class ParameterSet:
    """Ordered collection of named trainable tensors.

    Each tensor's ``data`` is a view into ``flat`` so the optimizer can update
    everything in one fused pass.
    """

    def __init__(self, spec):
        # spec: iterable of (name, ndarray initial value)
        spec = [(n, np.asarray(v, dtype=np.float64)) for n, v in spec]
        names = [n for n, _ in spec]
        if len(set(names)) != len(names):
            raise ValueError("duplicate parameter names")
        total = int(np.sum([v.size for _, v in spec])) if spec else 0
        self.flat = np.empty(total, dtype=np.float64)
        self._tensors = {}
        self._slices = {}
        off = 0
        for name, value in spec:
            n = value.size
            self.flat[off:off + n] = value.reshape(-1)
            t = Tensor(self.flat[off:off + n].reshape(value.shape), requires_grad=True, name=name)
            self._tensors[name] = t
            self._slices[name] = slice(off, off + n)
            off += n

    def __getitem__(self, name):
        return self._tensors[name]

    def __contains__(self, name):
        return name in self._tensors

    def __iter__(self):
        return iter(self._tensors)

    def __len__(self):
        return len(self._tensors)

    def names(self):
        return list(self._tensors)

    def items(self):
        return self._tensors.items()

    @property
    def size(self):
        return self.flat.size

    def flat_grad(self, grads):
        """Pack a ``{name: grad}`` mapping into a flat vector (missing -> 0)."""
        g = np.zeros_like(self.flat)
        for name, gv in grads.items():
            sl = self._slices.get(name)
            if sl is not None:
                g[sl] = np.asarray(gv).reshape(-1)
        return g

    def slice_of(self, name):
        return self._slices[name]

    def state_dict(self):
        return {n: t.data.copy() for n, t in self._tensors.items()}

    def load_state_dict(self, state):
        missing = [n for n in self._tensors if n not in state]
        if missing:
            raise KeyError(f"checkpoint missing parameters: {missing}")
        for n, t in self._tensors.items():
            t.data[...] = np.asarray(state[n]).reshape(t.shape)

    def copy(self):
        return ParameterSet([(n, t.data.copy()) for n, t in self._tensors.items()])
