"""Phenotype, pathway and consistency encodings of the gene graph."""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from ..numkernel import Tensor, matmul
from .vocab import IngestionError


class DegenerateGraphError(ValueError):
    pass


def phenotype_encoding(delta, W):
    """Row k is the sum of the cancer embeddings ``W[c]`` with ``delta[k, c] == 1``.

    ``W`` is a (C, d) tensor; the result stays differentiable in it.
    """
    delta = np.asarray(delta, dtype=np.float64)
    if delta.ndim != 2 or delta.shape[1] != W.shape[0]:
        raise ValueError(f"delta {delta.shape} incompatible with cancer embeddings {W.shape}")
    return matmul(Tensor(delta), W)


def incidence_matrix(membership, vocab):
    pathways = sorted({p for p, _ in membership})
    col = {p: j for j, p in enumerate(pathways)}
    B = np.zeros((vocab.K, len(pathways)), dtype=np.int64)
    unknown = sorted({g for _, g in membership if g not in vocab.genes})
    if unknown:
        raise IngestionError(f"pathway membership references unknown genes: {unknown}")
    gi = {g: i for i, g in enumerate(vocab.genes)}
    for p, g in set(membership):
        B[gi[g], col[p]] = 1
    return B


def pathway_adjacency(membership, vocab):
    """Bipartite projection of gene-pathway pairs with the self-loop rule.

    Off-diagonal entries count the pathways shared by two genes; the diagonal
    is the row's largest off-diagonal count plus one.
    """
    B = incidence_matrix(membership, vocab)
    A = B @ B.T
    K = vocab.K
    off = A.copy()
    np.fill_diagonal(off, 0)
    diag = (off.max(axis=1) if K > 1 else np.zeros(K, dtype=np.int64)) + 1
    np.fill_diagonal(A, diag)
    return A


def normalize_adjacency(A):
    """Symmetric GCN normalization ``D^-1/2 A D^-1/2`` with ``D = diag(row sums)``."""
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"adjacency must be square, got {A.shape}")
    if not np.array_equal(A, A.T):
        raise ValueError("adjacency must be symmetric")
    D = A.sum(axis=1)
    bad = np.flatnonzero(D <= 0)
    if bad.size:
        raise DegenerateGraphError(f"zero row sum at gene index {int(bad[0])}")
    return A / np.sqrt(np.outer(D, D))


def frequency_at_least(counts, n, threshold):
    """Exact ``counts / n >= threshold`` with the threshold read as written.

    ``0.1`` means 1/10, so a frequency of exactly one in ten qualifies.
    """
    thr = Fraction(repr(float(threshold)))
    c = np.asarray(counts).astype(object)
    return (c * thr.denominator >= thr.numerator * int(n)).astype(bool)


def consistency_encoding(table, prob_threshold=0.01, mode="joint", truncate=True):
    """Dataset-weighted co-mutation matrix.

    For each cancer c, a gene pair is flagged when its concurrence frequency
    among that cancer's slides reaches ``prob_threshold`` (``mode="joint"``),
    or when both genes individually do (``mode="marginal"``). Flags are
    weighted by the cancer's slide count and divided by the total. With
    ``truncate=False`` the frequency itself replaces the 0/1 flag.
    """
    if table.N == 0:
        raise IngestionError("consistency encoding needs at least one slide")
    if not 0 < prob_threshold < 1:
        raise ValueError("prob_threshold must lie in (0, 1)")
    if mode not in ("joint", "marginal"):
        raise ValueError(f"unknown mode {mode!r}")
    K = table.vocab.K
    Y = table.labels.astype(np.int64)
    cidx = table.cancer_indices()
    acc = np.zeros((K, K), dtype=np.int64 if truncate else np.float64)
    for c in range(table.vocab.C):
        Yc = Y[cidx == c]
        nc = Yc.shape[0]
        if nc == 0:
            continue
        J = Yc.T @ Yc
        if mode == "joint":
            freq = J / nc
        else:
            m = np.diag(J) / nc
            freq = np.outer(m, m)
            hit = frequency_at_least(np.diag(J), nc, prob_threshold)
            flag = np.outer(hit, hit)
        if truncate:
            if mode == "joint":
                flag = frequency_at_least(J, nc, prob_threshold)
            acc += flag.astype(np.int64) * nc
        else:
            acc += freq * nc
    E = acc / table.N
    np.fill_diagonal(E, 1.0)
    return E
