"""CSV serialization of evaluation results

Report CSV: one row per window, averaged over repetitions, followed by a
``summary`` row holding the stream-level values of the mean repetition::

    instances,ce_loss,auroc,node_count,grad_norm,transparency_ratio

Undefined values are written as empty cells. Floats use six decimals so
that repeated runs produce byte-identical files.
"""

import csv
from collections.abc import Sequence
from pathlib import Path

from pydantic import BaseModel

from sohot.evaluation.prequential import EvalReport

REPORT_HEADER = [
    "instances",
    "ce_loss",
    "auroc",
    "node_count",
    "grad_norm",
    "transparency_ratio",
]
COMPARE_HEADER = [
    "model",
    "ce_loss_mean",
    "ce_loss_se",
    "auroc_mean",
    "auroc_se",
    "winner_ce_loss",
    "winner_auroc",
]
REPETITION_HEADER = [
    "repetition",
    "seed",
    "instances",
    "ce_loss",
    "auroc",
    "accuracy",
    "partial",
]
TRANSPARENCY_HEADER = ["model", "alpha", "transparency_ratio", "auroc"]


def fmt(value: float | int | None) -> str:
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    return f"{value:.6f}"


def _mean(values: Sequence[float | None]) -> float | None:
    defined = [v for v in values if v is not None]
    return sum(defined) / len(defined) if defined else None


def report_rows(report: EvalReport) -> list[list[str]]:
    rows = [
        [
            fmt(w.instances),
            fmt(w.ce_loss),
            fmt(w.auroc),
            fmt(w.node_count),
            fmt(w.grad_norm),
            fmt(w.transparency_ratio),
        ]
        for w in report.mean_windows()
    ]
    reps = report.repetitions
    ce = report.ce_loss
    au = report.auroc
    nodes = _mean([r.node_count for r in reps])
    rows.append(
        [
            "summary",
            fmt(ce.mean if ce else None),
            fmt(au.mean if au else None),
            fmt(round(nodes) if nodes is not None else None),
            fmt(_mean([r.grad_norm for r in reps])),
            fmt(_mean([r.transparency_ratio for r in reps])),
        ]
    )
    return rows


def write_report_csv(report: EvalReport, path: Path) -> Path:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(REPORT_HEADER)
        writer.writerows(report_rows(report))
    return path


def write_repetitions_csv(report: EvalReport, path: Path) -> Path:
    """Raw per-repetition values for external significance tests"""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(REPETITION_HEADER)
        for r in report.repetitions:
            writer.writerow(
                [
                    r.repetition,
                    r.seed,
                    r.n_processed,
                    fmt(r.ce_loss),
                    fmt(r.auroc),
                    fmt(r.accuracy),
                    int(r.partial),
                ]
            )
    return path


class ComparisonRow(BaseModel):
    model: str
    ce_loss_mean: float | None
    ce_loss_se: float | None
    auroc_mean: float | None
    auroc_se: float | None
    winner_ce_loss: bool = False
    winner_auroc: bool = False


def compare_reports(reports: Sequence[EvalReport]) -> list[ComparisonRow]:
    """One row per model; every model tied for the best mean is marked"""
    rows = []
    for report in reports:
        ce, au = report.ce_loss, report.auroc
        rows.append(
            ComparisonRow(
                model=report.model,
                ce_loss_mean=ce.mean if ce else None,
                ce_loss_se=ce.se if ce else None,
                auroc_mean=au.mean if au else None,
                auroc_se=au.se if au else None,
            )
        )
    ce_values = [r.ce_loss_mean for r in rows if r.ce_loss_mean is not None]
    au_values = [r.auroc_mean for r in rows if r.auroc_mean is not None]
    best_ce = min(ce_values) if ce_values else None
    best_au = max(au_values) if au_values else None
    for row in rows:
        row.winner_ce_loss = best_ce is not None and row.ce_loss_mean == best_ce
        row.winner_auroc = best_au is not None and row.auroc_mean == best_au
    return rows


def write_compare_csv(rows: Sequence[ComparisonRow], path: Path) -> Path:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(COMPARE_HEADER)
        for row in rows:
            writer.writerow(
                [
                    row.model,
                    fmt(row.ce_loss_mean),
                    fmt(row.ce_loss_se),
                    fmt(row.auroc_mean),
                    fmt(row.auroc_se),
                    int(row.winner_ce_loss),
                    int(row.winner_auroc),
                ]
            )
    return path


class TransparencyRow(BaseModel):
    model: str
    alpha: float
    transparency_ratio: float | None
    auroc: float | None


def write_transparency_csv(rows: Sequence[TransparencyRow], path: Path) -> Path:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(TRANSPARENCY_HEADER)
        for row in rows:
            writer.writerow(
                [row.model, fmt(row.alpha), fmt(row.transparency_ratio), fmt(row.auroc)]
            )
    return path
