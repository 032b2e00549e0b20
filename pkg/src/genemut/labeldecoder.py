"""Modality fusion by cross-attention and the gene-wise projection.

Gene priors act as queries over patch features; the key/value projections
of the patches are computed once per slide and shared by every layer.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .blocks import FFNParams, NormParams, add_norm, ffn, ffn_from, ffn_spec, norm_from, norm_spec, square_spec
from .numkernel import (ContractError, NumericalError, Tensor, add, matmul, mean_cols, mul,
                        param_seed, reshape, scale, softmax_rows, sum_rows, transpose, xavier_init)


class EmptySlideError(ValueError):
    pass


@dataclass
class DecoderLayerParams:
    ffn: FFNParams
    norm1: NormParams
    norm2: NormParams


@dataclass
class DecoderParams:
    mk: Tensor
    mv: Tensor
    layers: list
    proj: Tensor  # (K, d): row k is gene k's projection vector


def decoder_param_spec(K, d, I, seed, d_ff=None):
    d_ff = 4 * d if d_ff is None else d_ff
    spec = [square_spec("dec.mk", d, seed), square_spec("dec.mv", d, seed)]
    for i in range(I):
        p = f"dec.layer{i}"
        spec += ffn_spec(f"{p}.ffn", d, d_ff, seed)
        spec += norm_spec(f"{p}.ln1", d) + norm_spec(f"{p}.ln2", d)
    # each projection vector is its own d x 1 Xavier draw
    rows = [xavier_init((d, 1), param_seed(seed, f"dec.proj.{k}"))[:, 0] for k in range(K)]
    spec.append(("dec.proj", np.stack(rows) if rows else np.zeros((0, d))))
    return spec


def decoder_params_from(store, I):
    layers = [DecoderLayerParams(ffn_from(store, f"dec.layer{i}.ffn"), norm_from(store, f"dec.layer{i}.ln1"),
                                 norm_from(store, f"dec.layer{i}.ln2")) for i in range(I)]
    return DecoderParams(store["dec.mk"], store["dec.mv"], layers, store["dec.proj"])


def project_kv(F, mk, mv):
    F = F if isinstance(F, Tensor) else Tensor(F)
    if F.data.ndim != 2 or F.shape[0] == 0:
        raise EmptySlideError(f"slide has no patches (features shape {F.shape})")
    return matmul(F, mk), matmul(F, mv)


def cross_attention(Q, K_ld):
    d = Q.shape[1]
    return softmax_rows(scale(matmul(Q, transpose(K_ld)), 1.0 / math.sqrt(d)))


def decoder_layer(Q, K_ld, V_ld, p, layer=0, return_attention=False):
    if Q.shape[1] != K_ld.shape[1]:
        raise ContractError(f"query dim {Q.shape[1]} != key dim {K_ld.shape[1]}")
    try:
        A = cross_attention(Q, K_ld)
        Q_hat = add_norm(matmul(A, V_ld), Q, p.norm1)
        out = add_norm(ffn(Q_hat, p.ffn), Q_hat, p.norm2)
    except NumericalError as exc:
        raise NumericalError(f"decoder layer {layer}: {exc}") from None
    return (out, A) if return_attention else out


def gene_wise_projection(Q, proj):
    """``y[k] = Q[k] . proj[k]``; one vector per gene, nothing shared."""
    if Q.shape != proj.shape:
        raise ContractError(f"{Q.shape[0]} gene rows but {proj.shape[0]} projection vectors "
                            f"(shapes {Q.shape} vs {proj.shape})")
    return sum_rows(mul(Q, proj))


def decode(P, F, params, return_attention=False):
    """Priors (K, d) and patch features (N, d) -> logits (K,)."""
    K_ld, V_ld = project_kv(F, params.mk, params.mv)
    Q, A = P, None
    for i, lp in enumerate(params.layers):
        Q, A = decoder_layer(Q, K_ld, V_ld, lp, layer=i, return_attention=True)
    y = gene_wise_projection(Q, params.proj)
    return (y, A) if return_attention else y


def matrix_fusion_spec(K, d, seed):
    return [("mat.w", xavier_init((d, d), param_seed(seed, "mat.w"))), ("mat.b", np.zeros(K))]


def matrix_fusion(P, F, w, b):
    """Attention-free fusion baseline: ``y = P (W f_mean) + b``."""
    F = F if isinstance(F, Tensor) else Tensor(F)
    if F.data.ndim != 2 or F.shape[0] == 0:
        raise EmptySlideError("slide has no patches")
    d = F.shape[1]
    wf = matmul(w, reshape(mean_cols(F), (d, 1)))
    return add(reshape(matmul(P, wf), (P.shape[0],)), b)


def sigmoid(y):
    y = np.asarray(y, dtype=np.float64)
    return np.exp(-np.logaddexp(0.0, -y))


def predict(logits, beta=0.5):
    if not 0 < beta < 1:
        raise ValueError("beta must lie in (0, 1)")
    y = logits.data if isinstance(logits, Tensor) else np.asarray(logits, dtype=np.float64)
    probs = sigmoid(y)
    return probs, (probs > beta).astype(np.int8)


def write_attention_csv(path, gene_ids, attention, coords=None):
    """One row per gene; header is patch indices or ``x,y`` tile coordinates."""
    A = np.asarray(attention)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if coords is None:
            header = [str(j) for j in range(A.shape[1])]
        else:
            header = [f"{int(x)},{int(y)}" for x, y in coords]
        w.writerow(["gene_id", *header])
        for gid, row in zip(gene_ids, A):
            w.writerow([gid, *(repr(float(v)) for v in row)])
