from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..numkernel import Tensor, concat, logsumexp, mean, mul, scale, softplus, sub, take, add

EMPTY_MODES = ("limit", "zero-anchor")


@dataclass
class LabeledLogits:
    y: Tensor
    y_star: np.ndarray

    def __post_init__(self):
        if not isinstance(self.y, Tensor):
            self.y = Tensor(self.y)
        self.y_star = np.asarray(self.y_star, dtype=np.int8).reshape(-1)
        if self.y_star.shape != self.y.shape:
            raise ValueError(f"{self.y.shape[0]} logits but {self.y_star.size} labels")
        if not np.isin(self.y_star, (0, 1)).all():
            raise ValueError("labels must be 0/1")

    @property
    def positives(self):
        return np.flatnonzero(self.y_star == 1)

    @property
    def negatives(self):
        return np.flatnonzero(self.y_star == 0)


def comparative_loss(sample, T=1.0, empty="limit"):
    """Softplus margin between the soft-max negative and the soft-min positive logit.

    ``softplus(logsumexp(y_neg) + T * logsumexp(-y_pos / T))``. With
    ``empty="limit"`` a sample lacking positives or negatives scores exactly
    zero (the log-sum-exp over an empty set is -inf). ``empty="zero-anchor"``
    appends a virtual logit 0 to both sets, which also pins the decision
    boundary at logit 0.
    """
    if not T > 0:
        raise ValueError(f"temperature T must be positive, got {T}")
    if empty not in EMPTY_MODES:
        raise ValueError(f"unknown empty-set mode {empty!r}")
    pos, neg = sample.positives, sample.negatives
    y = sample.y
    if empty == "limit":
        if pos.size == 0 or neg.size == 0:
            return Tensor(0.0)
        y_neg = take(y, neg)
        y_pos = scale(take(y, pos), -1.0 / T)
    else:
        zero = Tensor(np.zeros(1))
        y_neg = concat([take(y, neg), zero]) if neg.size else zero
        y_pos = concat([scale(take(y, pos), -1.0 / T), zero]) if pos.size else zero
    return softplus(add(logsumexp(y_neg), scale(logsumexp(y_pos), T)))


def bce_loss(sample):
    """Mean logit binary cross-entropy, ``softplus(y) - y * t`` per gene."""
    t = Tensor(sample.y_star.astype(np.float64))
    return mean(sub(softplus(sample.y), mul(sample.y, t)))
