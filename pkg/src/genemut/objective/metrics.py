"""Per-gene AUC/F1 and micro-averaged OP/OR/OF1."""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field

import numpy as np


class UndefinedMetricWarning(UserWarning):
    pass


def per_class_auc(scores, labels):
    """ROC AUC as P(score_pos > score_neg) + P(tie)/2.

    Uses mid-ranks of the sorted scores, so the result equals the pairwise
    count exactly. Returns NaN (and warns) when only one class is present.
    """
    s = np.asarray(scores, dtype=np.float64).reshape(-1)
    lab = np.asarray(labels).reshape(-1).astype(bool)
    if s.shape != lab.shape:
        raise ValueError("scores and labels differ in length")
    n_pos = int(lab.sum())
    n_neg = lab.size - n_pos
    if n_pos == 0 or n_neg == 0:
        warnings.warn("AUC undefined for single-class labels", UndefinedMetricWarning, stacklevel=2)
        return math.nan
    order = np.argsort(s, kind="mergesort")
    ss = s[order]
    # twice the 1-based mid-rank; integer valued so the sum below is exact
    ranks2 = np.empty(s.size, dtype=np.int64)
    i = 0
    n = s.size
    while i < n:
        j = i
        while j + 1 < n and ss[j + 1] == ss[i]:
            j += 1
        ranks2[i:j + 1] = (i + 1) + (j + 1)
        i = j + 1
    r2 = np.empty_like(ranks2)
    r2[order] = ranks2
    u2 = int(r2[lab].sum()) - n_pos * (n_pos + 1)  # 2 * Mann-Whitney U
    return (u2 / 2) / (n_pos * n_neg)


def confusion(calls, truth):
    c = np.asarray(calls).astype(bool)
    t = np.asarray(truth).astype(bool)
    tp = int(np.sum(c & t))
    fp = int(np.sum(c & ~t))
    fn = int(np.sum(~c & t))
    return tp, fp, fn


def _ratio(a, b):
    return a / b if b else 0.0


def prf(tp, fp, fn):
    # 2TP / (2TP + FP + FN) is the harmonic mean of p and r in one rounding
    return _ratio(tp, tp + fp), _ratio(tp, tp + fn), _ratio(2 * tp, 2 * tp + fp + fn)


def f1_per_class(calls, truth):
    """(precision, recall, F1); a zero denominator yields 0."""
    return prf(*confusion(calls, truth))


def overall_metrics(per_gene_auc, tps, fps, fns):
    """Mean of defined per-gene AUCs plus micro OP/OR/OF1 from summed counts."""
    auc = np.asarray(per_gene_auc, dtype=np.float64)
    defined = auc[~np.isnan(auc)]
    overall_auc = float(defined.mean()) if defined.size else math.nan
    op, or_, of1 = prf(int(np.sum(tps)), int(np.sum(fps)), int(np.sum(fns)))
    return overall_auc, op, or_, of1


@dataclass
class EvalReport:
    gene_ids: list
    auc: np.ndarray
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    tp: np.ndarray
    fp: np.ndarray
    fn: np.ndarray
    overall_auc: float
    op: float
    or_: float
    of1: float
    fold: int = 0
    n_undefined_auc: int = 0
    extra: dict = field(default_factory=dict)


def evaluate_predictions(probs, truth, gene_ids, beta=0.5, fold=0):
    """Build an :class:`EvalReport` from a (slides, K) probability matrix."""
    probs = np.asarray(probs, dtype=np.float64)
    truth = np.asarray(truth).astype(np.int8)
    calls = (probs > beta).astype(np.int8)
    K = probs.shape[1]
    auc = np.empty(K)
    tps, fps, fns = (np.zeros(K, dtype=np.int64) for _ in range(3))
    P, R, F = np.zeros(K), np.zeros(K), np.zeros(K)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UndefinedMetricWarning)
        for k in range(K):
            auc[k] = per_class_auc(probs[:, k], truth[:, k])
            tps[k], fps[k], fns[k] = confusion(calls[:, k], truth[:, k])
            P[k], R[k], F[k] = prf(tps[k], fps[k], fns[k])
    n_undef = int(np.isnan(auc).sum())
    if n_undef:
        warnings.warn(f"fold {fold}: AUC undefined for {n_undef} gene(s); excluded from overall AUC",
                      UndefinedMetricWarning, stacklevel=2)
    overall_auc, op, or_, of1 = overall_metrics(auc, tps, fps, fns)
    return EvalReport(list(gene_ids), auc, P, R, F, tps, fps, fns, overall_auc, op, or_, of1,
                      fold=fold, n_undefined_auc=n_undef)


SUMMARY_FIELDS = ("overall_auc", "op", "or_", "of1")


def aggregate(reports):
    """Mean and population std of the overall metrics across folds."""
    out = {}
    for f in SUMMARY_FIELDS:
        vals = np.array([getattr(r, f) for r in reports], dtype=np.float64)
        out[f] = (float(vals.mean()), float(vals.std()))
    return out


def _fmt(x):
    return repr(float(x))


def write_metrics_csv(path, reports):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["fold", "gene_id", "auc", "precision", "recall", "f1"])
        for r in reports:
            for k, gid in enumerate(r.gene_ids):
                w.writerow([r.fold, gid, _fmt(r.auc[k]), _fmt(r.precision[k]), _fmt(r.recall[k]),
                            _fmt(r.f1[k])])


SUMMARY_HEADER = ("fold", "overall_auc", "op", "or", "of1", "undefined_auc")


def summary_rows(reports, label=None):
    """Per-fold rows followed by ``mean`` and ``std`` rows."""
    pre = [label] if label is not None else []
    rows = [[*pre, r.fold, _fmt(r.overall_auc), _fmt(r.op), _fmt(r.or_), _fmt(r.of1), r.n_undefined_auc]
            for r in reports]
    agg = aggregate(reports)
    rows.append([*pre, "mean", *(_fmt(agg[f][0]) for f in SUMMARY_FIELDS), ""])
    rows.append([*pre, "std", *(_fmt(agg[f][1]) for f in SUMMARY_FIELDS), ""])
    return rows


def write_summary_csv(path, reports, label=None):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([*(["config"] if label is not None else []), *SUMMARY_HEADER])
        w.writerows(summary_rows(reports, label))
