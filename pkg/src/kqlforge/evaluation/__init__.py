"""Metric computation, dataset evaluation, and hyperparameter sweeps."""

from .harness import EvalRecord, MetricsReport, evaluate_dataset, evaluate_pair
from .metrics import score_filter, score_semantic, score_syntax, score_table, shape_of
from .sweep import KNOB_FIELDS, SweepPoint, run_sweep

__all__ = [
    "EvalRecord",
    "KNOB_FIELDS",
    "MetricsReport",
    "SweepPoint",
    "evaluate_dataset",
    "evaluate_pair",
    "run_sweep",
    "score_filter",
    "score_semantic",
    "score_syntax",
    "score_table",
    "shape_of",
]
