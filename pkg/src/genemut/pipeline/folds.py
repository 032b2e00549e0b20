import numpy as np


def kfold_split(num_slides, k=5, seed=0, strata=None):
    """Partition ``range(num_slides)`` into ``k`` folds, stratified by ``strata``.

    Indices are shuffled within each stratum, strata are laid end to end, and
    position ``i`` of that sequence goes to fold ``i % k``. Fold sizes differ
    by at most one and every stratum is spread as evenly as possible.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    if num_slides < k:
        raise ValueError(f"cannot split {num_slides} slides into {k} folds")
    strata = np.zeros(num_slides, dtype=np.int64) if strata is None else np.asarray(strata)
    if strata.shape != (num_slides,):
        raise ValueError("strata must have one entry per slide")
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0xF01D]))
    seq = []
    for s in sorted(set(strata.tolist())):
        idx = np.flatnonzero(strata == s)
        seq.extend(rng.permutation(idx).tolist())
    folds = [[] for _ in range(k)]
    for pos, i in enumerate(seq):
        folds[pos % k].append(i)
    return [np.array(sorted(f), dtype=np.int64) for f in folds]


def train_indices(folds, held_out):
    return np.sort(np.concatenate([f for j, f in enumerate(folds) if j != held_out]))
