from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .vocab import GeneVocabulary


class AssemblyError(ValueError):
    pass


@dataclass(frozen=True)
class GeneGraph:
    """Validated, immutable gene graph.

    The phenotype encoding is kept as the association matrix ``delta``; the
    cancer embeddings it sums over are trainable and live with the model.
    """
    vocab: GeneVocabulary
    G: np.ndarray
    delta: np.ndarray
    E_adj: np.ndarray
    E_con: np.ndarray

    @property
    def K(self):
        return self.vocab.K

    @property
    def d(self):
        return self.G.shape[1]

    def permuted(self, perm):
        """Reorder genes by ``perm`` (new index i holds old gene ``perm[i]``)."""
        perm = np.asarray(perm)
        vocab = GeneVocabulary([self.vocab.genes[i] for i in perm], self.vocab.cancers)
        return GeneGraph(vocab, self.G[perm], self.delta[perm],
                         self.E_adj[np.ix_(perm, perm)], self.E_con[np.ix_(perm, perm)])


def _first(mask):
    i, j = np.argwhere(mask)[0]
    return int(i), int(j)


def _check_square(name, M, K):
    if M.shape != (K, K):
        raise AssemblyError(f"{name} has shape {M.shape}, expected ({K}, {K})")
    if not np.isfinite(M).all():
        raise AssemblyError(f"{name} non-finite at {_first(~np.isfinite(M))}")
    asym = np.abs(M - M.T) > 1e-12
    if asym.any():
        raise AssemblyError(f"{name} not symmetric at {_first(asym)}")


def assemble_graph(G, delta, E_adj, E_con, vocab):
    """Validate every matrix against ``vocab`` and build a :class:`GeneGraph`."""
    K, C = vocab.K, vocab.C
    G = np.array(G, dtype=np.float64)
    delta = np.array(delta, dtype=np.float64)
    E_adj = np.array(E_adj, dtype=np.float64)
    E_con = np.array(E_con, dtype=np.float64)
    if G.ndim != 2 or G.shape[0] != K:
        raise AssemblyError(f"G has shape {G.shape}, expected ({K}, d)")
    if not np.isfinite(G).all():
        raise AssemblyError(f"G non-finite at {_first(~np.isfinite(G))}")
    if delta.shape != (K, C):
        raise AssemblyError(f"delta has shape {delta.shape}, expected ({K}, {C})")
    nb = ~np.isin(delta, (0.0, 1.0))
    if nb.any():
        raise AssemblyError(f"delta not binary at {_first(nb)}")
    _check_square("E_adj", E_adj, K)
    if (E_adj < 0).any():
        raise AssemblyError(f"E_adj negative at {_first(E_adj < 0)}")
    _check_square("E_con", E_con, K)
    bad = (E_con < 0) | (E_con > 1)
    if bad.any():
        raise AssemblyError(f"E_con outside [0, 1] at {_first(bad)}")
    diag = np.flatnonzero(np.diag(E_con) != 1.0)
    if diag.size:
        i = int(diag[0])
        raise AssemblyError(f"E_con diagonal not 1 at ({i}, {i})")
    for M in (G, delta, E_adj, E_con):
        M.setflags(write=False)
    return GeneGraph(vocab, G, delta, E_adj, E_con)
