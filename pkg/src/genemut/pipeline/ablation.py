"""One-axis-at-a-time ablations sharing folds, seeds and data order."""
from __future__ import annotations

import csv
import os

from ..objective import SUMMARY_HEADER, aggregate, summary_rows
from .config import ALL_ENCODINGS, ConfigError
from .train import run_cv

AXES = {
    # "+x" means encoding x alone on one-hot initial features
    "encodings": [("none", {"encodings": ()}), ("+pathway", {"encodings": ("pathway",)}),
                  ("+phenotype", {"encodings": ("phenotype",)}),
                  ("+consistency", {"encodings": ("consistency",)}), ("all", {"encodings": ALL_ENCODINGS})],
    "association": [("kam", {"association": True}), ("none", {"association": False})],
    "fusion": [("mfm", {"fusion": "mfm"}), ("matrix", {"fusion": "matrix"})],
    "loss": [("comparative", {"loss": "comparative"}), ("bce", {"loss": "bce"})],
    "T": [(f"T={t}", {"T": t}) for t in (0.25, 0.5, 1.0, 2.0)],
}


NOTES = {("fusion", "matrix"): "stand-in baseline: y = P W mean(F) + b"}


def ablation_configs(base_cfg, axes):
    bad = [a for a in axes if a not in AXES]
    if bad:
        raise ConfigError(f"unknown ablation axes {bad}; choose from {sorted(AXES)}")
    return [(axis, name, base_cfg.replace(**change)) for axis in axes for name, change in AXES[axis]]


def ablation_suite(base_cfg, dataset, axes=("encodings", "association", "fusion", "loss"), out_dir=None,
                   log=None):
    """Run every configuration of the requested axes; identical configs run once.

    Returns rows ``(axis, name, reports)`` and, with ``out_dir``, writes
    ``ablation.csv`` (mean/std per configuration) and ``ablation_folds.csv``
    (per-fold rows followed by mean and std rows per configuration).
    """
    cache, rows = {}, []
    for axis, name, cfg in ablation_configs(base_cfg, axes):
        key = tuple(cfg.to_lines())
        if key not in cache:
            if log:
                log(f"[{axis}] {name}")
            cache[key] = run_cv(cfg, dataset, log=log).reports
        rows.append((axis, name, cache[key]))
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        write_ablation_csv(os.path.join(out_dir, "ablation.csv"), rows)
        write_ablation_folds(os.path.join(out_dir, "ablation_folds.csv"), rows)
    return rows


def write_ablation_csv(path, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["axis", "config", "folds", "of1_mean", "of1_std", "auc_mean", "auc_std", "note"])
        for axis, name, reports in rows:
            agg = aggregate(reports)
            w.writerow([axis, name, len(reports), repr(agg["of1"][0]), repr(agg["of1"][1]),
                        repr(agg["overall_auc"][0]), repr(agg["overall_auc"][1]), NOTES.get((axis, name), "")])


def write_ablation_folds(path, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["config", *SUMMARY_HEADER])
        for axis, name, reports in rows:
            w.writerows(summary_rows(reports, label=f"{axis}:{name}"))
