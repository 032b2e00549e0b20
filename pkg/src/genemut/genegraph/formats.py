"""Readers and writers for the plain-text gene/cancer/label files."""
from __future__ import annotations

import csv

import numpy as np

from .vocab import GeneRecord, GeneVocabulary, MutationTable, ParseError


def write_genes(path, records):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for r in records:
            if "\t" in r.gene_id or "\n" in r.description or "\t" in r.description:
                raise ValueError(f"gene {r.gene_id!r}: tabs/newlines not allowed")
            fh.write(f"{r.gene_id}\t{r.description}\n")


def read_genes(path):
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            gid, sep, desc = line.partition("\t")
            if not gid:
                raise ParseError(path, lineno, "missing gene id")
            records.append(GeneRecord(gid, desc))
    return records


def write_cancers(path, cancers):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for c in cancers:
            fh.write(f"{c}\n")


def read_cancers(path):
    with open(path, encoding="utf-8") as fh:
        return [line.strip() for line in fh if line.strip()]


def write_delta(path, vocab, delta):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["gene_id", *vocab.cancers])
        for gid, row in zip(vocab.genes, np.asarray(delta, dtype=int)):
            w.writerow([gid, *row.tolist()])


def _bit(path, lineno, s):
    if s not in ("0", "1"):
        raise ParseError(path, lineno, f"expected 0/1, got {s!r}")
    return int(s)


def read_delta(path, vocab):
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParseError(path, 1, "empty file")
    header = rows[0][1:]
    if list(header) != list(vocab.cancers):
        raise ParseError(path, 1, f"cancer columns {header} do not match vocabulary")
    delta = np.zeros((vocab.K, vocab.C), dtype=np.int8)
    seen = set()
    for lineno, row in enumerate(rows[1:], 2):
        if not row:
            continue
        if len(row) != vocab.C + 1:
            raise ParseError(path, lineno, f"expected {vocab.C + 1} fields, got {len(row)}")
        if row[0] not in vocab.genes:
            raise ParseError(path, lineno, f"unknown gene {row[0]!r}")
        k = vocab.genes.index(row[0])
        delta[k] = [_bit(path, lineno, s) for s in row[1:]]
        seen.add(row[0])
    missing = [g for g in vocab.genes if g not in seen]
    if missing:
        raise ParseError(path, len(rows), f"no rows for genes {missing}")
    return delta


def write_pathways(path, membership):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for p, g in membership:
            fh.write(f"{p}\t{g}\n")


def read_pathways(path):
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not all(parts):
                raise ParseError(path, lineno, "expected 'pathway_id<TAB>gene_id'")
            out.append((parts[0], parts[1]))
    return out


def write_labels(path, table):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["slide_id", "cancer_type", *table.vocab.genes])
        for sid, ct, row in zip(table.slide_ids, table.cancer_types, table.labels):
            w.writerow([sid, ct, *row.tolist()])


def read_labels(path, vocab):
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParseError(path, 1, "empty file")
    if rows[0][2:] != list(vocab.genes):
        raise ParseError(path, 1, "gene columns do not match vocabulary")
    sids, cts, labels = [], [], []
    for lineno, row in enumerate(rows[1:], 2):
        if not row:
            continue
        if len(row) != vocab.K + 2:
            raise ParseError(path, lineno, f"expected {vocab.K + 2} fields, got {len(row)}")
        if row[1] not in vocab.cancers:
            raise ParseError(path, lineno, f"unknown cancer type {row[1]!r}")
        sids.append(row[0])
        cts.append(row[1])
        labels.append([_bit(path, lineno, s) for s in row[2:]])
    labels = np.array(labels, dtype=np.int8).reshape(len(sids), vocab.K)
    return MutationTable(vocab, sids, cts, labels)


def vocab_from_files(genes_path, cancers_path):
    records = read_genes(genes_path)
    return GeneVocabulary([r.gene_id for r in records], read_cancers(cancers_path)), records
