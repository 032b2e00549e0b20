"""Training losses and evaluation metrics."""
from .losses import EMPTY_MODES, LabeledLogits, bce_loss, comparative_loss
from .metrics import (SUMMARY_HEADER, EvalReport, UndefinedMetricWarning, aggregate, confusion, evaluate_predictions,
                      f1_per_class, overall_metrics, per_class_auc, prf, summary_rows, write_metrics_csv,
                      write_summary_csv)

__all__ = [
    "LabeledLogits", "comparative_loss", "bce_loss", "EMPTY_MODES", "per_class_auc",
    "f1_per_class", "confusion", "prf", "overall_metrics", "EvalReport", "evaluate_predictions",
    "aggregate", "summary_rows", "SUMMARY_HEADER", "write_metrics_csv", "write_summary_csv", "UndefinedMetricWarning",
]
