import math

import numpy as np


def xavier_bound(shape):
    fan_in, fan_out = shape
    return math.sqrt(6.0 / (fan_in + fan_out))


def xavier_init(shape, seed):
    """Glorot-uniform matrix; ``seed`` is an int or a ``SeedSequence``."""
    shape = tuple(int(s) for s in shape)
    if len(shape) != 2:
        raise ValueError(f"xavier_init needs a 2-D shape, got {shape}")
    b = xavier_bound(shape)
    return np.random.default_rng(seed).uniform(-b, b, size=shape)
