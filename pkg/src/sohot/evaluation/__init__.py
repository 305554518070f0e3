"""Prequential evaluation, metrics and model pools"""

from sohot.evaluation.metrics import AurocAccumulator, auroc, binary_auroc
from sohot.evaluation.pool import ModelPool, hyperparameter_grid, pool_predict_train
from sohot.evaluation.prequential import (
    EvalReport,
    MetricSummary,
    RepetitionResult,
    WindowRow,
    prequential_repetition,
    prequential_run,
    summarize,
)
from sohot.evaluation.transparency import transparency_series

__all__ = [
    "AurocAccumulator",
    "EvalReport",
    "MetricSummary",
    "ModelPool",
    "RepetitionResult",
    "WindowRow",
    "auroc",
    "binary_auroc",
    "hyperparameter_grid",
    "pool_predict_train",
    "prequential_repetition",
    "prequential_run",
    "summarize",
    "transparency_series",
]
