"""
Evaluation metrics.

This package contains the assessment and
diagnosis metrics and the report format.
- pcc, mse
- mdd_detection_metrics, per
- EvalReport, aggregate_seeds
"""

from .apa_metrics import mse, pcc
from .mdd_metrics import (
    DetectionCounts,
    DetectionScores,
    ErrorRateResult,
    corpus_per,
    detection_counts,
    edit_distance,
    harmonic_mean,
    mdd_detection_metrics,
    per,
    per_counts,
)
from .eval_report import EvalReport, aggregate_seeds

__all__ = [
    "mse",
    "pcc",
    "DetectionCounts",
    "DetectionScores",
    "ErrorRateResult",
    "corpus_per",
    "detection_counts",
    "edit_distance",
    "harmonic_mean",
    "mdd_detection_metrics",
    "per",
    "per_counts",
    "EvalReport",
    "aggregate_seeds",
]
