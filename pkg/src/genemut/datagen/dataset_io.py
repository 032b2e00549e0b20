"""On-disk dataset directory.

Layout::

    genes.tsv  cancers.txt  delta.csv  pathways.tsv  labels.csv  manifest.txt
    features/<slide_id>.ten     patch features (tensor format)
    coords/<slide_id>.csv       optional tile coordinates, one "x,y" per patch
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from ..genegraph import GeneVocabulary, MutationTable, ParseError
from ..genegraph import formats
from ..numkernel import TensorFormatError, load_tensor, save_tensor
from .synth import SlideSample

FORMAT_VERSION = 1


@dataclass
class Dataset:
    vocab: GeneVocabulary
    records: list
    delta: np.ndarray
    pathways: list
    table: MutationTable
    slides: list
    manifest: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.slides)

    @property
    def d(self):
        return self.slides[0].features.shape[1]


def _write_manifest(path, manifest, n):
    lines = [f"format_version={FORMAT_VERSION}", f"num_slides={n}"]
    for k in sorted(manifest):
        if k in ("format_version", "num_slides"):
            continue
        v = manifest[k]
        lines.append(f"{k}={'' if v is None else v}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_manifest(path):
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ParseError(path, lineno, "expected key=value")
            k, v = line.split("=", 1)
            out[k.strip()] = v.strip()
    return out


def save_dataset(path, ds):
    os.makedirs(os.path.join(path, "features"), exist_ok=True)
    j = lambda name: os.path.join(path, name)  # noqa: E731
    formats.write_genes(j("genes.tsv"), ds.records)
    formats.write_cancers(j("cancers.txt"), ds.vocab.cancers)
    formats.write_delta(j("delta.csv"), ds.vocab, ds.delta)
    formats.write_pathways(j("pathways.tsv"), ds.pathways)
    formats.write_labels(j("labels.csv"), ds.table)
    has_coords = any(s.coords is not None for s in ds.slides)
    if has_coords:
        os.makedirs(j("coords"), exist_ok=True)
    for s in ds.slides:
        save_tensor(os.path.join(path, "features", f"{s.slide_id}.ten"), s.features)
        if s.coords is not None:
            with open(os.path.join(path, "coords", f"{s.slide_id}.csv"), "w", encoding="utf-8",
                      newline="\n") as fh:
                fh.writelines(f"{x},{y}\n" for x, y in s.coords)
    _write_manifest(j("manifest.txt"), ds.manifest, len(ds.slides))


def _read_coords(path):
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                x, y = (int(v) for v in line.split(","))
            except ValueError:
                raise ParseError(path, lineno, "expected 'x,y' integers") from None
            rows.append((x, y))
    return np.array(rows, dtype=np.int64).reshape(-1, 2)


def load_dataset(path):
    j = lambda name: os.path.join(path, name)  # noqa: E731
    for name in ("genes.tsv", "cancers.txt", "delta.csv", "pathways.tsv", "labels.csv"):
        if not os.path.exists(j(name)):
            raise FileNotFoundError(f"dataset {path}: missing {name}")
    vocab, records = formats.vocab_from_files(j("genes.tsv"), j("cancers.txt"))
    delta = formats.read_delta(j("delta.csv"), vocab)
    pathways = formats.read_pathways(j("pathways.tsv"))
    table = formats.read_labels(j("labels.csv"), vocab)
    manifest = read_manifest(j("manifest.txt")) if os.path.exists(j("manifest.txt")) else {}
    slides = []
    for sid, ct, y in zip(table.slide_ids, table.cancer_types, table.labels):
        fpath = os.path.join(path, "features", f"{sid}.ten")
        try:
            F = load_tensor(fpath)
        except FileNotFoundError:
            raise ParseError(fpath, 0, f"slide {sid}: feature file missing") from None
        except TensorFormatError as exc:
            raise ParseError(fpath, 1, f"slide {sid}: {exc}") from None
        cpath = os.path.join(path, "coords", f"{sid}.csv")
        coords = _read_coords(cpath) if os.path.exists(cpath) else None
        if coords is not None and coords.shape[0] != F.shape[0]:
            raise ParseError(cpath, coords.shape[0], f"slide {sid}: {coords.shape[0]} coords for {F.shape[0]} patches")
        slides.append(SlideSample(sid, ct, F, y, coords))
    manifest.pop("format_version", None)
    manifest.pop("num_slides", None)
    return Dataset(vocab, records, delta, pathways, table, slides, manifest)
