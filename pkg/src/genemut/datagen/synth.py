"""Synthetic slides with planted co-mutation groups and visual signal."""
from __future__ import annotations

import math
import string
from dataclasses import asdict, dataclass, field

import numpy as np

from ..genegraph import GeneRecord, GeneVocabulary, MutationTable
from ..genegraph.encodings import frequency_at_least

CANCER_CODES = ("BRCA", "LUAD", "COAD", "HNSC", "KIRC", "LGG", "THCA", "UCEC", "STAD")
FUNCTIONS = ("kinase signaling", "tumor suppressor", "chromatin remodeling", "dna repair",
             "cell adhesion", "transcription factor", "apoptosis regulator", "ubiquitin ligase",
             "growth factor receptor", "metabolic enzyme", "splicing factor", "cell cycle checkpoint")


class GenerationError(ValueError):
    pass


@dataclass
class SynthConfig:
    seed: int = 0
    num_slides: int = 200
    K: int = 30
    C: int = 9
    d: int = 32
    patches_min: int = 8
    patches_max: int = 24
    # None -> consecutive groups of ``group_size`` over the first genes
    groups: tuple = None
    group_size: int = 3
    num_groups: int = 5
    rho: float = 0.9
    group_member_rate: float = 0.2   # marginal rate of a group member in an associated cancer
    base_rate: float = 0.15          # singleton rate in an associated cancer
    signal: float = 3.0
    noise: float = 1.0
    signal_fraction: float = 0.5
    family_mix: float = 0.6          # share of a group's common direction in each member's signature
    assoc_min: int = 2
    assoc_max: int = 5
    noise_pathways: int = 3
    delta_threshold: float = 0.01

    def resolved_groups(self):
        if self.groups is not None:
            return tuple(tuple(int(i) for i in g) for g in self.groups)
        out, start = [], 0
        for _ in range(self.num_groups):
            if start + self.group_size > self.K:
                break
            out.append(tuple(range(start, start + self.group_size)))
            start += self.group_size
        return tuple(out)

    def validate(self):
        if self.num_slides < 1 or self.K < 1 or self.C < 1 or self.d < 1:
            raise GenerationError("num_slides, K, C and d must be positive")
        if not 1 <= self.patches_min <= self.patches_max:
            raise GenerationError("need 1 <= patches_min <= patches_max")
        groups = self.resolved_groups()
        seen = set()
        for g in groups:
            if not g or any(not 0 <= i < self.K for i in g):
                raise GenerationError(f"group {g} has indices outside 0..{self.K - 1}")
            if seen & set(g):
                raise GenerationError(f"groups overlap on genes {sorted(seen & set(g))}")
            seen |= set(g)
        if not 0 < self.rho <= 1:
            raise GenerationError("rho must lie in (0, 1]")
        for name in ("group_member_rate", "base_rate"):
            if not 0 < getattr(self, name) < 1:
                raise GenerationError(f"{name} must lie in (0, 1)")
        if groups and self.group_member_rate / self.rho >= 1:
            raise GenerationError(
                f"group_member_rate {self.group_member_rate} is unreachable with rho {self.rho}: "
                "the group indicator rate would be >= 1")
        if self.signal < 0 or self.noise <= 0 or not 0 < self.signal_fraction <= 1:
            raise GenerationError("need signal >= 0, noise > 0, signal_fraction in (0, 1]")
        if not 0 <= self.family_mix <= 1:
            raise GenerationError("family_mix must lie in [0, 1]")
        if not 1 <= self.assoc_min <= self.assoc_max:
            raise GenerationError("need 1 <= assoc_min <= assoc_max")
        if not 0 < self.delta_threshold < 1:
            raise GenerationError("delta_threshold must lie in (0, 1)")

    def as_dict(self):
        d = asdict(self)
        d["groups"] = ";".join(",".join(map(str, g)) for g in self.resolved_groups())
        return d


@dataclass
class SlideSample:
    slide_id: str
    cancer_type: str
    features: np.ndarray = field(repr=False)
    labels: np.ndarray = field(repr=False)
    coords: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int8)
        if self.features.ndim != 2 or self.features.shape[0] < 1:
            raise ValueError(f"slide {self.slide_id}: need at least one patch")
        if self.coords is not None:
            self.coords = np.asarray(self.coords, dtype=np.int64).reshape(-1, 2)
            if self.coords.shape[0] != self.features.shape[0]:
                raise ValueError(f"slide {self.slide_id}: coords/features row mismatch")


def _letters(i):
    s = ""
    i += 1
    while i:
        i, r = divmod(i - 1, 26)
        s = string.ascii_uppercase[r] + s
    return s


def _unit(v):
    return v / np.linalg.norm(v)


def _structure(cfg, rng):
    K, C = cfg.K, cfg.C
    cancers = list(CANCER_CODES[:C]) if C <= len(CANCER_CODES) else [f"CT{_letters(c)}" for c in range(C)]
    groups = cfg.resolved_groups()
    group_of = {k: g for g, members in enumerate(groups) for k in members}

    def assoc():
        n = int(rng.integers(cfg.assoc_min, min(cfg.assoc_max, C) + 1))
        return np.sort(rng.choice(C, size=min(n, C), replace=False))

    group_assoc = [assoc() for _ in groups]
    gene_assoc, gene_ids, funcs = [], [], []
    single = 0
    for k in range(K):
        if k in group_of:
            g = group_of[k]
            gene_assoc.append(group_assoc[g])
            gene_ids.append(f"FAM{_letters(g)}{groups[g].index(k) + 1}")
            funcs.append(FUNCTIONS[g % len(FUNCTIONS)])
        else:
            gene_assoc.append(assoc())
            gene_ids.append(f"SOL{_letters(single)}")
            funcs.append(FUNCTIONS[int(rng.integers(len(FUNCTIONS)))])
            single += 1

    records = []
    for k in range(K):
        where = " ".join(cancers[c].lower() for c in gene_assoc[k])
        fam = f" member of the {gene_ids[k].rstrip('0123456789')} family" if k in group_of else ""
        records.append(GeneRecord(gene_ids[k], f"{gene_ids[k]} {funcs[k]}{fam}; altered in {where}"))

    common = [_unit(rng.standard_normal(cfg.d)) for _ in groups]
    dirs = np.empty((K, cfg.d))
    for k in range(K):
        own = _unit(rng.standard_normal(cfg.d))
        if k in group_of:
            a = cfg.family_mix
            dirs[k] = _unit(a * common[group_of[k]] + (1 - a) * own)
        else:
            dirs[k] = own

    membership = []
    for g, members in enumerate(groups):
        membership += [(f"R-HSA-{1000 + g}", gene_ids[k]) for k in members]
    for p in range(cfg.noise_pathways):
        size = int(rng.integers(2, min(4, K) + 1)) if K >= 2 else 1
        for k in np.sort(rng.choice(K, size=size, replace=False)):
            membership.append((f"R-HSA-{2000 + p}", gene_ids[k]))

    assoc_mask = np.zeros((K, C), dtype=bool)
    for k in range(K):
        assoc_mask[k, gene_assoc[k]] = True
    return cancers, gene_ids, records, dirs, membership, assoc_mask, groups


def generate_dataset(cfg):
    """Return a :class:`~genemut.datagen.Dataset` fully determined by ``cfg``.

    Each slide draws from its own RNG stream keyed by ``(seed, slide index)``.
    """
    from .dataset_io import Dataset

    cfg.validate()
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 0]))
    cancers, gene_ids, records, dirs, membership, assoc_mask, groups = _structure(cfg, rng)
    vocab = GeneVocabulary(gene_ids, cancers)
    grouped = {k for g in groups for k in g}
    singles = [k for k in range(cfg.K) if k not in grouped]
    indicator_rate = cfg.group_member_rate / cfg.rho

    slides, labels, ctypes = [], [], []
    width = len(str(cfg.num_slides - 1))
    for s in range(cfg.num_slides):
        r = np.random.default_rng(np.random.SeedSequence([cfg.seed, 1, s]))
        c = int(r.integers(cfg.C))
        y = np.zeros(cfg.K, dtype=np.int8)
        for members in groups:
            z = assoc_mask[members[0], c] and r.random() < indicator_rate
            draws = r.random(len(members))
            if z:
                y[list(members)] = draws < cfg.rho
        draws = r.random(len(singles))
        for k, u in zip(singles, draws):
            y[k] = assoc_mask[k, c] and u < cfg.base_rate
        n = int(r.integers(cfg.patches_min, cfg.patches_max + 1))
        F = cfg.noise * r.standard_normal((n, cfg.d))
        for k in np.flatnonzero(y):
            mask = r.random(n) < cfg.signal_fraction
            if not mask.any():
                mask[int(r.integers(n))] = True
            F[mask] += cfg.signal * dirs[k]
        side = math.ceil(math.sqrt(n))
        coords = np.array([((j % side) * 256, (j // side) * 256) for j in range(n)], dtype=np.int64)
        sid = f"S{s:0{width}d}"
        slides.append(SlideSample(sid, cancers[c], F, y, coords))
        labels.append(y)
        ctypes.append(cancers[c])

    table = MutationTable(vocab, [sl.slide_id for sl in slides], ctypes, np.array(labels))
    delta = derive_delta(table, cfg.delta_threshold)
    manifest = {"generator": "synthetic", **{k: v for k, v in cfg.as_dict().items()}}
    return Dataset(vocab, records, delta, membership, table, slides, manifest)


def derive_delta(table, threshold=0.01):
    """``delta[k, c] = 1`` iff gene k's mutation frequency in cancer c reaches ``threshold``."""
    cidx = table.cancer_indices()
    delta = np.zeros((table.vocab.K, table.vocab.C), dtype=np.int8)
    for c in range(table.vocab.C):
        rows = table.labels[cidx == c]
        if rows.shape[0]:
            delta[:, c] = frequency_at_least(rows.sum(axis=0), rows.shape[0], threshold)
    return delta
