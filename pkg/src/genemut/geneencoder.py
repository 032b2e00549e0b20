"""Knowledge association module: edge-biased self-attention over genes.

Each layer computes attention logits ``QK^T/sqrt(d) + Gamma*E_con +
Lambda*E_adj``, mixes values with the row softmax, then applies the usual
post-norm residual/FFN sandwich. ``Gamma`` and ``Lambda`` are shared by all
layers. With both set to zero a layer is a plain single-head encoder layer
(no output projection).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .blocks import (FFNParams, NormParams, add_norm, ffn, ffn_from, ffn_spec, norm_from,
                     norm_spec, square_spec)
from .genegraph import phenotype_encoding
from .numkernel import NumericalError, Tensor, add, matmul, mul, scale, softmax_rows, transpose


@dataclass
class KALParams:
    wq: Tensor
    wk: Tensor
    wv: Tensor
    ffn: FFNParams
    norm1: NormParams
    norm2: NormParams


@dataclass
class KAMParams:
    layers: list
    gamma: Tensor
    lam: Tensor


def kam_param_spec(K, d, L, seed, d_ff=None, bias_init=1.0):
    d_ff = 4 * d if d_ff is None else d_ff
    spec = []
    for layer in range(L):
        p = f"kam.layer{layer}"
        spec += [square_spec(f"{p}.wq", d, seed), square_spec(f"{p}.wk", d, seed),
                 square_spec(f"{p}.wv", d, seed)]
        spec += ffn_spec(f"{p}.ffn", d, d_ff, seed)
        spec += norm_spec(f"{p}.ln1", d) + norm_spec(f"{p}.ln2", d)
    spec += [("kam.gamma", np.full((K, K), bias_init)), ("kam.lambda", np.full((K, K), bias_init))]
    return spec


def kam_params_from(store, L):
    layers = []
    for layer in range(L):
        p = f"kam.layer{layer}"
        layers.append(KALParams(store[f"{p}.wq"], store[f"{p}.wk"], store[f"{p}.wv"],
                                ffn_from(store, f"{p}.ffn"), norm_from(store, f"{p}.ln1"),
                                norm_from(store, f"{p}.ln2")))
    return KAMParams(layers, store["kam.gamma"], store["kam.lambda"])


def kam_input(G, Phi):
    return add(G, Phi)


def attention_logits(H, p, gamma, lam, E_con, E_adj):
    d = H.shape[1]
    q, k = matmul(H, p.wq), matmul(H, p.wk)
    S = scale(matmul(q, transpose(k)), 1.0 / math.sqrt(d))
    return add(add(S, mul(gamma, E_con)), mul(lam, E_adj))


def kal_forward(H, p, gamma, lam, E_con, E_adj, layer=0, return_attention=False):
    """One knowledge association layer: (K, d) -> (K, d)."""
    E_con = E_con if isinstance(E_con, Tensor) else Tensor(E_con)
    E_adj = E_adj if isinstance(E_adj, Tensor) else Tensor(E_adj)
    try:
        A = softmax_rows(attention_logits(H, p, gamma, lam, E_con, E_adj))
        H_hat = matmul(A, matmul(H, p.wv))
        H_mid = add_norm(H_hat, H, p.norm1)
        out = add_norm(ffn(H_mid, p.ffn), H_mid, p.norm2)
    except NumericalError as exc:
        raise NumericalError(f"knowledge association layer {layer}: {exc}") from None
    return (out, A) if return_attention else out


def gene_priors(graph, params, cancer_embeddings, G=None):
    """Run the whole module on a graph and return the (K, d) gene priors.

    ``params.layers`` may be empty, in which case the priors are just the
    linguistic features plus the phenotype encoding.
    """
    G = Tensor(graph.G if G is None else G)
    H = kam_input(G, phenotype_encoding(graph.delta, cancer_embeddings))
    E_con, E_adj = Tensor(graph.E_con), Tensor(graph.E_adj)
    for layer, lp in enumerate(params.layers):
        H = kal_forward(H, lp, params.gamma, params.lam, E_con, E_adj, layer=layer)
    return H
