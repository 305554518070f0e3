"""Prequential (test-then-train) evaluation"""

import logging
import math
from collections.abc import Callable, Iterable

import numpy as np
from pydantic import BaseModel, Field

from sohot.core.numerics import log_loss
from sohot.evaluation.metrics import AurocAccumulator, auroc
from sohot.models import PrequentialConfig
from sohot.streams.base import Sample, Stream
from sohot.trees.base import StreamClassifier

logger = logging.getLogger(__name__)


class WindowRow(BaseModel):
    """Metrics of one window of instances"""

    instances: int = Field(..., description="Instances seen at the end of the window")
    ce_loss: float
    auroc: float | None = None
    node_count: int | None = None
    grad_norm: float | None = None
    transparency_ratio: float | None = None


class RepetitionResult(BaseModel):
    """Outcome of one pass over a freshly seeded stream"""

    repetition: int
    seed: int
    windows: list[WindowRow] = Field(default_factory=list)
    n_processed: int = 0
    ce_loss: float = math.nan
    auroc: float | None = None
    accuracy: float = math.nan
    grad_norm: float | None = None
    transparency_ratio: float | None = None
    node_count: int | None = None
    partial: bool = False

    @property
    def final_window_ce(self) -> float:
        return self.windows[-1].ce_loss if self.windows else math.nan


class MetricSummary(BaseModel):
    """Mean and standard error over repetitions"""

    values: list[float]
    mean: float
    se: float


def summarize(values: Iterable[float | None]) -> MetricSummary | None:
    """Mean and ``std(ddof=1) / sqrt(R)``; None if no value is defined"""
    defined = [float(v) for v in values if v is not None]
    if not defined:
        return None
    arr = np.asarray(defined)
    se = float(arr.std(ddof=1) / math.sqrt(arr.shape[0])) if arr.shape[0] > 1 else 0.0
    return MetricSummary(values=defined, mean=float(arr.mean()), se=se)


def _mean_or_none(values: list[float | None]) -> float | None:
    defined = [v for v in values if v is not None]
    return float(np.mean(defined)) if defined else None


class EvalReport(BaseModel):
    """Results of all repetitions of one model on one stream"""

    model: str
    n_features: int
    n_classes: int
    repetitions: list[RepetitionResult] = Field(default_factory=list)

    @property
    def partial(self) -> bool:
        return any(r.partial for r in self.repetitions)

    @property
    def ce_loss(self) -> MetricSummary | None:
        return summarize(r.ce_loss for r in self.repetitions)

    @property
    def auroc(self) -> MetricSummary | None:
        return summarize(r.auroc for r in self.repetitions)

    @property
    def transparency_ratio(self) -> MetricSummary | None:
        return summarize(r.transparency_ratio for r in self.repetitions)

    def mean_windows(self) -> list[WindowRow]:
        """Window series averaged over repetitions, index by index"""
        if not self.repetitions:
            return []
        length = max(len(r.windows) for r in self.repetitions)
        rows = []
        for i in range(length):
            group = [r.windows[i] for r in self.repetitions if i < len(r.windows)]
            node_counts = [w.node_count for w in group if w.node_count is not None]
            rows.append(
                WindowRow(
                    instances=group[0].instances,
                    ce_loss=float(np.mean([w.ce_loss for w in group])),
                    auroc=_mean_or_none([w.auroc for w in group]),
                    node_count=(
                        round(float(np.mean(node_counts))) if node_counts else None
                    ),
                    grad_norm=_mean_or_none([w.grad_norm for w in group]),
                    transparency_ratio=_mean_or_none(
                        [w.transparency_ratio for w in group]
                    ),
                )
            )
        return rows


class _Window:
    def __init__(self) -> None:
        self.losses: list[float] = []
        self.proba: list[np.ndarray] = []
        self.labels: list[int] = []
        self.grad_norms: list[float] = []
        self.transparency: list[float] = []

    def row(self, instances: int, model: StreamClassifier) -> WindowRow:
        window_auroc = auroc(np.vstack(self.proba), np.asarray(self.labels))
        return WindowRow(
            instances=instances,
            ce_loss=float(np.mean(self.losses)),
            auroc=window_auroc,
            node_count=model.diagnostics().node_count,
            grad_norm=float(np.mean(self.grad_norms)) if self.grad_norms else None,
            transparency_ratio=(
                float(np.mean(self.transparency)) if self.transparency else None
            ),
        )


def prequential_repetition(
    model: StreamClassifier,
    stream: Iterable[Sample],
    config: PrequentialConfig,
    *,
    repetition: int = 0,
    seed: int = 0,
) -> RepetitionResult:
    """Test-then-train over one stream

    Every instance is evaluated before the model sees its label.
    """
    result = RepetitionResult(repetition=repetition, seed=seed)
    accumulator = AurocAccumulator(model.n_classes, config.auroc_capacity, seed)
    window = _Window()
    p = model.n_features

    total_loss = 0.0
    correct = 0
    grad_norms: list[float] = []
    ratios: list[float] = []

    t = 0
    for sample in stream:
        if t >= config.n_instances:
            break
        x, y = sample.features, sample.label
        evaluation = model.evaluate_one(x)
        loss = log_loss(evaluation.proba, y)

        total_loss += loss
        correct += int(int(np.argmax(evaluation.proba)) == y)
        accumulator.add(evaluation.proba, y)
        window.losses.append(loss)
        window.proba.append(evaluation.proba)
        window.labels.append(y)
        for count in evaluation.transparency_counts:
            window.transparency.append(count / p)
            ratios.append(count / p)

        model.learn_one(x, y)

        grad_norm = model.last_grad_output_norm
        if grad_norm is not None:
            window.grad_norms.append(grad_norm)
            grad_norms.append(grad_norm)

        t += 1
        if t % config.window == 0:
            result.windows.append(window.row(t, model))
            window = _Window()

    if window.losses:
        result.windows.append(window.row(t, model))

    result.n_processed = t
    result.partial = t < config.n_instances
    if result.partial:
        logger.warning(
            "Stream ended after %d of %d instances; report is partial",
            t,
            config.n_instances,
        )
    if t:
        result.ce_loss = total_loss / t
        result.accuracy = correct / t
    result.auroc = accumulator.compute()
    result.grad_norm = float(np.mean(grad_norms)) if grad_norms else None
    result.transparency_ratio = float(np.mean(ratios)) if ratios else None
    result.node_count = model.diagnostics().node_count
    return result


def prequential_run(
    model_factory: Callable[[int, int, int], StreamClassifier],
    stream_factory: Callable[[int], Stream],
    config: PrequentialConfig,
    model_name: str = "model",
) -> EvalReport:
    """Sequential repetitions with seeds ``base_seed + r``

    Args:
        model_factory: ``(n_features, n_classes, seed)`` -> fresh model
        stream_factory: ``seed`` -> fresh stream
    """
    report: EvalReport | None = None
    for r in range(config.repetitions):
        seed = config.base_seed + r
        stream = stream_factory(seed)
        model = model_factory(stream.n_features, stream.n_classes, seed)
        logger.info("Repetition %d (seed %d) of %s started", r, seed, model_name)
        result = prequential_repetition(
            model, stream, config, repetition=r, seed=seed
        )
        logger.info(
            "Repetition %d finished: ce_loss=%.4f auroc=%s",
            r,
            result.ce_loss,
            "-" if result.auroc is None else f"{result.auroc:.4f}",
        )
        if report is None:
            report = EvalReport(
                model=model_name,
                n_features=stream.n_features,
                n_classes=stream.n_classes,
            )
        report.repetitions.append(result)
    assert report is not None
    return report
