"""Experiment orchestration for sohot runs

Repetitions and compared models run as independent jobs. Each job owns
its model and its stream, so jobs are spread over worker threads with
``asyncio.to_thread`` and collected with ``asyncio.gather``; results come
back in submission order, which keeps every output identical to a
sequential run.
"""

import asyncio
import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from typing import Any, TypeVar

from pydantic import BaseModel

from sohot.config import ConfigError, RunConfig
from sohot.evaluation.pool import ModelPool, hyperparameter_grid
from sohot.evaluation.prequential import (
    EvalReport,
    RepetitionResult,
    prequential_repetition,
)
from sohot.evaluation.report import TransparencyRow
from sohot.models import HT_LIMIT_DEFAULT, ModelKind, StreamKind
from sohot.streams.factory import build_stream
from sohot.trees.base import StreamClassifier
from sohot.trees.hoeffding import HoeffdingTree
from sohot.trees.soft_tree import SoftTree
from sohot.trees.sohot import SoHoTree

logger = logging.getLogger(__name__)

T = TypeVar("T")
P = TypeVar("P", bound=BaseModel)


def _with_overrides(params: P, overrides: dict[str, Any] | None) -> P:
    if not overrides:
        return params
    return type(params).model_validate({**params.model_dump(), **overrides})


def build_model(
    config: RunConfig,
    kind: ModelKind,
    n_features: int,
    n_classes: int,
    seed: int,
    overrides: dict[str, Any] | None = None,
) -> StreamClassifier:
    """Fresh model of ``kind`` for a stream with the given dimensions"""
    if kind == ModelKind.SOHOT:
        return SoHoTree(n_features, n_classes, _with_overrides(config.sohot, overrides))
    if kind in (ModelKind.HT, ModelKind.HT_LIMIT):
        params = _with_overrides(config.hoeffding, overrides)
        if kind == ModelKind.HT_LIMIT and params.internal_node_limit is None:
            params = params.model_copy(update={"internal_node_limit": HT_LIMIT_DEFAULT})
        return HoeffdingTree(n_features, n_classes, params)
    if kind == ModelKind.ST:
        params = _with_overrides(config.soft_tree, overrides)
        return SoftTree(n_features, n_classes, params, seed=seed)
    if kind == ModelKind.POOL:
        member_kind = config.pool.model
        grid = hyperparameter_grid(
            member_kind,
            hyperplane=config.stream.kind == StreamKind.HYPERPLANE,
            size=config.pool.size,
        )
        members = [
            build_model(config, member_kind, n_features, n_classes, seed + i, point)
            for i, point in enumerate(grid)
        ]
        logger.info("Built pool of %d %s models", len(members), member_kind.value)
        return ModelPool(members, decay=config.pool.decay, assignments=grid)
    msg = f"unsupported model kind {kind}"
    raise ConfigError(msg, key="model")


@dataclass
class RepetitionOutcome:
    result: RepetitionResult
    model: StreamClassifier
    n_features: int
    n_classes: int


@dataclass
class ExperimentResult:
    """Report plus the final model of repetition 0 (for dumps)"""

    report: EvalReport
    model: StreamClassifier


def run_repetition(
    config: RunConfig,
    kind: ModelKind,
    repetition: int,
    overrides: dict[str, Any] | None = None,
) -> RepetitionOutcome:
    """One prequential pass with seed ``base_seed + repetition``"""
    seed = config.prequential.base_seed + repetition
    stream = build_stream(config.stream, seed)
    model = build_model(
        config, kind, stream.n_features, stream.n_classes, seed, overrides
    )
    logger.info("Repetition %d of %s started (seed %d)", repetition, kind.value, seed)
    result = prequential_repetition(
        model, stream, config.prequential, repetition=repetition, seed=seed
    )
    logger.info(
        "Repetition %d of %s finished after %d instances",
        repetition,
        kind.value,
        result.n_processed,
    )
    return RepetitionOutcome(result, model, stream.n_features, stream.n_classes)


async def gather_in_threads(jobs: Sequence[Callable[[], T]], workers: int) -> list[T]:
    """Run blocking jobs on at most ``workers`` threads; results in job order"""
    if workers <= 1:
        return [job() for job in jobs]
    semaphore = asyncio.Semaphore(workers)

    async def run(job: Callable[[], T]) -> T:
        async with semaphore:
            return await asyncio.to_thread(job)

    return list(await asyncio.gather(*(run(job) for job in jobs)))


def _collect(
    name: str, outcomes: Sequence[RepetitionOutcome]
) -> ExperimentResult:
    first = outcomes[0]
    report = EvalReport(
        model=name,
        n_features=first.n_features,
        n_classes=first.n_classes,
        repetitions=[o.result for o in outcomes],
    )
    if report.partial:
        logger.warning("Report for %s is partial", name)
    return ExperimentResult(report=report, model=first.model)


async def run_experiment(
    config: RunConfig,
    kind: ModelKind | None = None,
    overrides: dict[str, Any] | None = None,
    name: str | None = None,
) -> ExperimentResult:
    """All repetitions of one model"""
    kind = kind or config.model
    reps = config.prequential.repetitions
    jobs = [
        (lambda r=r: run_repetition(config, kind, r, overrides)) for r in range(reps)
    ]
    outcomes = await gather_in_threads(jobs, config.workers)
    return _collect(name or kind.value, outcomes)


async def run_comparison(
    config: RunConfig, kinds: Sequence[ModelKind]
) -> list[ExperimentResult]:
    """Every model on identically seeded copies of the stream

    Raises:
        ConfigError: If fewer than two models are given
    """
    if len(kinds) < 2:
        msg = "compare needs at least two models"
        raise ConfigError(msg, key="models")
    reps = config.prequential.repetitions
    jobs = [
        (lambda k=k, r=r: run_repetition(config, k, r))
        for k in kinds
        for r in range(reps)
    ]
    outcomes = await gather_in_threads(jobs, config.workers)
    return [
        _collect(kind.value, outcomes[i * reps : (i + 1) * reps])
        for i, kind in enumerate(kinds)
    ]


async def run_alpha_sweep(
    config: RunConfig,
    alphas: Sequence[float],
    *,
    include_st: bool = False,
) -> list[TransparencyRow]:
    """Transparency ratio and AUROC of the soft Hoeffding tree per alpha

    With ``include_st`` a soft tree row (reported at alpha 1) is appended.
    """
    reps = config.prequential.repetitions
    settings: list[tuple[str, ModelKind, float, dict[str, Any] | None]] = [
        ("sohot", ModelKind.SOHOT, alpha, {"alpha": alpha}) for alpha in alphas
    ]
    if include_st:
        settings.append(("st", ModelKind.ST, 1.0, None))

    jobs = [
        (lambda k=kind, o=overrides, r=r: run_repetition(config, k, r, o))
        for _, kind, _, overrides in settings
        for r in range(reps)
    ]
    outcomes = await gather_in_threads(jobs, config.workers)

    rows = []
    for i, (name, _, alpha, _) in enumerate(settings):
        result = _collect(name, outcomes[i * reps : (i + 1) * reps])
        ratio = result.report.transparency_ratio
        au = result.report.auroc
        rows.append(
            TransparencyRow(
                model=name,
                alpha=alpha,
                transparency_ratio=ratio.mean if ratio else None,
                auroc=au.mean if au else None,
            )
        )
    return rows
