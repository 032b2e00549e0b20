"""Initial gene features from free-text descriptions.

Two embedders: ``token-hash`` (deterministic bag of hashed tokens) and
``file:<path>`` (precomputed vectors, one ``gene_id v1 .. vd`` per line).
"""
from __future__ import annotations

import hashlib
import re
from functools import lru_cache

import numpy as np

from .vocab import IngestionError, ParseError

_SPLIT = re.compile(r"[^0-9a-z]+")


def tokenize(text):
    """Lowercase, split on non-alphanumerics, strip trailing digits.

    ``"BRCA1"`` and ``"BRCA2"`` both become ``"brca"``; a purely numeric token
    keeps its digits.
    """
    out = []
    for tok in _SPLIT.split(text.lower()):
        if not tok:
            continue
        out.append(tok.rstrip("0123456789") or tok)
    return out


@lru_cache(maxsize=65536)
def _token_vector(token, d, seed):
    digest = hashlib.blake2b(f"{seed}:{token}".encode(), digest_size=16).digest()
    rng = np.random.default_rng(int.from_bytes(digest, "little"))
    v = rng.standard_normal(d)
    v /= np.linalg.norm(v)
    v.setflags(write=False)
    return v


def hash_embed(text, d, seed=0):
    toks = tokenize(text)
    if not toks:
        return np.zeros(d)
    return np.mean([_token_vector(t, d, seed) for t in toks], axis=0)


def load_embeddings(path):
    table = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts:
                continue
            try:
                table[parts[0]] = np.array([float(x) for x in parts[1:]])
            except ValueError:
                raise ParseError(path, lineno, "non-numeric embedding value") from None
    return table


def save_embeddings(path, gene_ids, G):
    with open(path, "w", encoding="utf-8") as fh:
        for gid, row in zip(gene_ids, np.asarray(G)):
            fh.write(gid + " " + " ".join(repr(float(x)) for x in row) + "\n")


def embed_linguistic(records, embedder="token-hash", d=64, seed=0):
    """Return the K x d initial feature matrix, rows in ``records`` order."""
    if embedder == "token-hash":
        return np.stack([hash_embed(r.description, d, seed) for r in records]) if records \
            else np.zeros((0, d))
    if isinstance(embedder, str) and embedder.startswith("file:"):
        path = embedder[5:]
        table = load_embeddings(path)
        missing = [r.gene_id for r in records if r.gene_id not in table]
        if missing:
            raise IngestionError(f"{path}: no embedding for genes {missing}")
        G = np.stack([table[r.gene_id] for r in records])
        if G.shape[1] != d:
            raise IngestionError(f"{path}: embeddings have dimension {G.shape[1]}, expected {d}")
        return G
    raise ValueError(f"unknown embedder {embedder!r}; use 'token-hash' or 'file:<path>'")


def one_hot_features(K, d):
    if d < K:
        raise ValueError(f"one-hot gene features need d >= K (d={d}, K={K})")
    return np.eye(K, d)
