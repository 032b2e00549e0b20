"""Cross-validated training and evaluation."""
from __future__ import annotations

import csv
import json
import os
import time
from dataclasses import dataclass, field

import numpy as np

from ..datagen import load_dataset
from ..labeldecoder import sigmoid, write_attention_csv
from ..numkernel import AdamState, NumericalError, adam_step, backward, load_checkpoint, save_checkpoint
from ..objective import evaluate_predictions, write_metrics_csv, write_summary_csv
from .folds import kfold_split, train_indices
from .model import Model, build_graph

RECORD_VERSION = 1


class TrainingError(RuntimeError):
    pass


@dataclass
class RunRecord:
    config: dict
    folds: list
    loss_history: dict = field(default_factory=dict)   # fold -> per-epoch mean loss
    reports: list = field(default_factory=list)
    steps: dict = field(default_factory=dict)
    wall_time: float = 0.0
    format_version: int = RECORD_VERSION


def dataset_folds(dataset, cfg):
    return kfold_split(len(dataset), cfg.folds, cfg.seed, strata=dataset.table.cancer_indices())


def train_model(cfg, dataset, train_idx, fold=0, graph=None):
    """Fit one model on ``train_idx`` with per-slide Adam steps.

    Returns ``(model, per-epoch mean losses, optimizer steps)``. Slide order
    depends only on (seed, fold, epoch), so ablations see identical data order.
    """
    graph = build_graph(dataset, cfg, train_idx) if graph is None else graph
    model = Model(graph, cfg, dataset.d)
    state = AdamState(model.params.size, lr=cfg.lr, l2_weight=cfg.l2_weight)
    history, steps = [], 0
    train_idx = np.asarray(train_idx)
    for epoch in range(cfg.epochs):
        rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 0x0DE7, fold, epoch]))
        total, n = 0.0, 0
        for i in rng.permutation(train_idx):
            slide = dataset.slides[i]
            try:
                loss = model.loss(model.logits(slide.features), slide.labels)
                grads = backward(loss)
            except NumericalError as exc:
                raise TrainingError(f"epoch {epoch}, slide {slide.slide_id}: {exc}") from None
            value = loss.item()
            if not np.isfinite(value):
                raise TrainingError(f"epoch {epoch}, slide {slide.slide_id}: loss is {value}")
            adam_step(state, model.params, grads)
            total += value
            n += 1
            steps += 1
            if cfg.max_steps and steps >= cfg.max_steps:
                break
        history.append(total / max(n, 1))
        if cfg.max_steps and steps >= cfg.max_steps:
            break
    return model, history, steps


def evaluate(model, dataset, idx, beta=0.5, fold=0):
    slides = [dataset.slides[i] for i in idx]
    probs = sigmoid(model.predict_logits(slides))
    truth = np.stack([s.labels for s in slides])
    return evaluate_predictions(probs, truth, dataset.vocab.genes, beta=beta, fold=fold)


def run_cv(cfg, dataset, out_dir=None, log=None):
    """Train/evaluate every selected fold; optionally persist all outputs."""
    cfg.validate()
    t0 = time.perf_counter()
    folds = dataset_folds(dataset, cfg)
    chosen = cfg.fold_subset or tuple(range(cfg.folds))
    record = RunRecord(config=dict(line.split("=", 1) for line in cfg.to_lines()),
                       folds=[f.tolist() for f in folds])
    if out_dir:
        os.makedirs(os.path.join(out_dir, "checkpoints"), exist_ok=True)
    for fold in chosen:
        tr = train_indices(folds, fold)
        model, hist, steps = train_model(cfg, dataset, tr, fold=fold)
        report = evaluate(model, dataset, folds[fold], cfg.beta, fold)
        record.loss_history[fold] = hist
        record.steps[fold] = steps
        record.reports.append(report)
        if log:
            log(f"fold {fold}: loss {hist[-1]:.4f} OF1 {report.of1:.4f} AUC {report.overall_auc:.4f}")
        if out_dir:
            save_checkpoint(os.path.join(out_dir, "checkpoints", f"fold{fold}.ckpt"),
                            model.params.state_dict())
    record.wall_time = time.perf_counter() - t0
    if out_dir:
        write_run_outputs(out_dir, cfg, dataset, record)
    return record


def write_run_outputs(out_dir, cfg, dataset, record):
    with open(os.path.join(out_dir, "run_config.txt"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(cfg.to_lines()) + "\n")
    write_summary_csv(os.path.join(out_dir, "summary.csv"), record.reports)
    write_metrics_csv(os.path.join(out_dir, "metrics.csv"), record.reports)
    with open(os.path.join(out_dir, "loss.csv"), "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["fold", "epoch", "loss"])
        for fold, hist in record.loss_history.items():
            for e, v in enumerate(hist):
                w.writerow([fold, e, repr(float(v))])
    with open(os.path.join(out_dir, "folds.csv"), "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["slide_id", "fold"])
        for fold, idx in enumerate(record.folds):
            for i in idx:
                w.writerow([dataset.slides[i].slide_id, fold])
    with open(os.path.join(out_dir, "record.json"), "w", encoding="utf-8") as fh:
        json.dump({"format_version": record.format_version, "wall_time_s": record.wall_time,
                   "steps": {str(k): v for k, v in record.steps.items()},
                   "folds_run": [r.fold for r in record.reports]}, fh, indent=2)


def load_trained(run_dir, fold, dataset=None):
    """Rebuild the model of ``fold`` from a run directory."""
    from .config import load_config

    cfg = load_config(os.path.join(run_dir, "run_config.txt"))
    dataset = load_dataset(cfg.dataset) if dataset is None else dataset
    folds = dataset_folds(dataset, cfg)
    graph = build_graph(dataset, cfg, train_indices(folds, fold))
    model = Model(graph, cfg, dataset.d)
    model.params.load_state_dict(load_checkpoint(os.path.join(run_dir, "checkpoints", f"fold{fold}.ckpt")))
    return cfg, dataset, folds, model


def export_attention(model, dataset, idx, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for i in idx:
        s = dataset.slides[i]
        A = model.attention(s.features)
        if A is None:
            raise ValueError("attention maps exist only for the cross-attention fusion")
        path = os.path.join(out_dir, f"{s.slide_id}.csv")
        write_attention_csv(path, dataset.vocab.genes, A, s.coords)
        written.append(path)
    return written
