"""Transformer sub-blocks shared by the gene encoder and the label decoder."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numkernel import Tensor, add, gelu, layer_norm, matmul, param_seed, xavier_init

LN_EPS = 1e-5


@dataclass
class FFNParams:
    w1: Tensor
    b1: Tensor
    w2: Tensor
    b2: Tensor


@dataclass
class NormParams:
    gain: Tensor
    bias: Tensor


def ffn(x, p):
    return add(matmul(gelu(add(matmul(x, p.w1), p.b1)), p.w2), p.b2)


def add_norm(x, residual, p):
    return layer_norm(add(x, residual), p.gain, p.bias, LN_EPS)


def ffn_spec(prefix, d, d_ff, seed):
    return [
        (f"{prefix}.w1", xavier_init((d, d_ff), param_seed(seed, f"{prefix}.w1"))),
        (f"{prefix}.b1", np.zeros(d_ff)),
        (f"{prefix}.w2", xavier_init((d_ff, d), param_seed(seed, f"{prefix}.w2"))),
        (f"{prefix}.b2", np.zeros(d)),
    ]


def norm_spec(prefix, d):
    return [(f"{prefix}.g", np.ones(d)), (f"{prefix}.b", np.zeros(d))]


def ffn_from(store, prefix):
    return FFNParams(store[f"{prefix}.w1"], store[f"{prefix}.b1"],
                     store[f"{prefix}.w2"], store[f"{prefix}.b2"])


def norm_from(store, prefix):
    return NormParams(store[f"{prefix}.g"], store[f"{prefix}.b"])


def square_spec(name, d, seed):
    return (name, xavier_init((d, d), param_seed(seed, name)))
