from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class IngestionError(ValueError):
    pass


class ParseError(IngestionError):
    def __init__(self, path, line, message):
        self.path, self.line = str(path), line
        super().__init__(f"{path}:{line}: {message}")


@dataclass(frozen=True)
class GeneVocabulary:
    """Fixed gene and cancer orderings; indices everywhere follow these."""
    genes: tuple
    cancers: tuple

    def __post_init__(self):
        object.__setattr__(self, "genes", tuple(self.genes))
        object.__setattr__(self, "cancers", tuple(self.cancers))
        for kind, ids in (("gene", self.genes), ("cancer", self.cancers)):
            if len(set(ids)) != len(ids):
                dup = sorted({x for x in ids if ids.count(x) > 1})
                raise IngestionError(f"duplicate {kind} ids: {dup}")

    @property
    def K(self):
        return len(self.genes)

    @property
    def C(self):
        return len(self.cancers)

    def gene_index(self, gene_id):
        try:
            return self.genes.index(gene_id)
        except ValueError:
            raise IngestionError(f"unknown gene id {gene_id!r}") from None

    def cancer_index(self, cancer_id):
        try:
            return self.cancers.index(cancer_id)
        except ValueError:
            raise IngestionError(f"unknown cancer id {cancer_id!r}") from None


@dataclass(frozen=True)
class GeneRecord:
    gene_id: str
    description: str = ""

    @property
    def is_empty(self):
        return not self.description.strip()


@dataclass
class MutationTable:
    """Slide-level mutation labels: ``labels[s, k] == 1`` iff gene k is mutated."""
    vocab: GeneVocabulary
    slide_ids: list
    cancer_types: list
    labels: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int8)
        n = len(self.slide_ids)
        if self.labels.shape != (n, self.vocab.K):
            raise IngestionError(f"labels shape {self.labels.shape} != ({n}, {self.vocab.K})")
        if len(self.cancer_types) != n:
            raise IngestionError("cancer_types length differs from slide count")
        if not np.isin(self.labels, (0, 1)).all():
            raise IngestionError("labels must be 0/1")
        for c in self.cancer_types:
            self.vocab.cancer_index(c)

    @property
    def N(self):
        return len(self.slide_ids)

    def cancer_indices(self):
        lookup = {c: i for i, c in enumerate(self.vocab.cancers)}
        return np.array([lookup[c] for c in self.cancer_types], dtype=np.intp)

    def cancer_counts(self):
        return np.bincount(self.cancer_indices(), minlength=self.vocab.C)

    def subset(self, idx):
        idx = list(idx)
        return MutationTable(self.vocab, [self.slide_ids[i] for i in idx],
                             [self.cancer_types[i] for i in idx], self.labels[idx])
