"""CLI interface for sohot

Outputs of ``run``:

* report CSV (``--out``): ``instances,ce_loss,auroc,node_count,grad_norm,transparency_ratio``,
  one row per window averaged over repetitions plus a ``summary`` row
* ``<out stem>.reps.csv``: per-repetition stream-level values
* ``<out stem>.config.yaml``: every resolved setting; pass it back with
  ``--config`` to reproduce the run
* ``--dump-tree``: final model of repetition 0, one node per line, two
  spaces of indentation per depth level::

      # <model> p=<p> k=<k> nodes=<node count>
      I d=<depth> f=<feature> th=<threshold> |w|=<l2norm>
      L d=<depth> p=[<softmax probs, 4 decimals>] n=<samples seen>

* ``--plot PREFIX``: ``PREFIX.dat`` and a gnuplot script ``PREFIX.gp``
"""

import asyncio
import logging
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path
from typing import Annotated, Any

import typer
from dotenv import load_dotenv
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

# Load environment variables from .env file
load_dotenv()

from sohot import __version__
from sohot.config import ConfigError, RunConfig, resolve_run_config, write_config_echo
from sohot.core.numerics import ContractViolationError
from sohot.engine import run_alpha_sweep, run_comparison, run_experiment
from sohot.evaluation.report import (
    compare_reports,
    fmt,
    write_compare_csv,
    write_report_csv,
    write_repetitions_csv,
    write_transparency_csv,
)
from sohot.models import ModelKind
from sohot.plotting import write_plot
from sohot.streams.base import StreamParseError

app = typer.Typer(
    name="sohot",
    help="Soft Hoeffding trees on drifting data streams",
    no_args_is_help=True,
)
console = Console()


# shared options

ConfigOpt = Annotated[
    Path | None, typer.Option("--config", help="Config file (default: .sohot.yaml)")
]
StreamOpt = Annotated[
    str | None, typer.Option("--stream", help="sea, agrawal, hyperplane, rbf or csv")
]
CsvOpt = Annotated[Path | None, typer.Option("--csv", help="CSV file to stream")]
LabelColumnOpt = Annotated[
    str | None, typer.Option("--label-column", help="Label column name or index")
]
InstancesOpt = Annotated[
    int | None, typer.Option("--instances", "-n", help="Instances per repetition")
]
WindowOpt = Annotated[int | None, typer.Option("--window", help="Metric window size")]
RepsOpt = Annotated[int | None, typer.Option("--reps", help="Repetitions")]
SeedOpt = Annotated[int | None, typer.Option("--seed", help="Base seed")]
AlphaOpt = Annotated[float | None, typer.Option("--alpha", help="SoHoT alpha")]
GammaOpt = Annotated[float | None, typer.Option("--gamma", help="Smooth-step width")]
MaxDepthOpt = Annotated[int | None, typer.Option("--max-depth", help="Maximum depth")]
DeltaOpt = Annotated[float | None, typer.Option("--delta", help="Hoeffding confidence")]
TauOpt = Annotated[float | None, typer.Option("--tau", help="Tie-break threshold")]
EpsilonSOpt = Annotated[
    float | None, typer.Option("--epsilon-s", help="Reach cutoff for leaf statistics")
]
GraceOpt = Annotated[int | None, typer.Option("--grace", help="Grace period")]
LearningRateOpt = Annotated[
    float | None, typer.Option("--learning-rate", help="Adam learning rate")
]
LeafPredictionOpt = Annotated[
    str | None, typer.Option("--leaf-prediction", help="HT leaf predictor: mc or nba")
]
NodeLimitOpt = Annotated[
    int | None, typer.Option("--node-limit", help="HT internal node limit")
]
DriftKindOpt = Annotated[
    str | None,
    typer.Option(
        "--drift-kind", help="none, abrupt, gradual, perturbation or oversample"
    ),
]
DriftAtOpt = Annotated[
    str | None, typer.Option("--drift-at", help="Comma-separated drift positions")
]
DriftWidthOpt = Annotated[
    int | None, typer.Option("--drift-width", help="Width of gradual drifts")
]
PerturbationOpt = Annotated[
    float | None, typer.Option("--perturbation", help="Perturbation drift magnitude")
]
NoiseOpt = Annotated[float | None, typer.Option("--noise", help="Label noise")]
AgrawalOpt = Annotated[
    str | None,
    typer.Option("--agrawal-functions", help="Agrawal functions per concept, e.g. 1,2"),
]
NoShuffleOpt = Annotated[
    bool, typer.Option("--no-shuffle", help="Keep CSV rows in file order")
]
WorkersOpt = Annotated[int | None, typer.Option("--workers", help="Worker threads")]
VerboseOpt = Annotated[bool, typer.Option("--verbose", "-v", help="Log progress")]
DebugOpt = Annotated[bool, typer.Option("--debug", help="Log everything")]


def setup_logging(verbose: bool = False, debug: bool = False) -> None:
    level = logging.DEBUG if debug else logging.INFO if verbose else logging.WARNING
    logging.basicConfig(
        level=level,
        format="%(message)s",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


@contextmanager
def handle_errors() -> Iterator[None]:
    """Turn known failures into a red message and exit status 1"""
    try:
        yield
    except typer.Exit:
        raise
    except ConfigError as e:
        console.print(f"\n[bold red]✗ Configuration error:[/bold red] {e}")
        raise typer.Exit(1) from None
    except StreamParseError as e:
        console.print(f"\n[bold red]✗ Parse error:[/bold red] {e}")
        raise typer.Exit(1) from None
    except ContractViolationError as e:
        console.print(f"\n[bold red]✗ Contract violation:[/bold red] {e}")
        raise typer.Exit(1) from None
    except OSError as e:
        console.print(f"\n[bold red]✗ I/O error:[/bold red] {e}")
        raise typer.Exit(1) from None
    except Exception as e:
        console.print(f"\n[bold red]✗ Unexpected error:[/bold red] {e}")
        raise typer.Exit(1) from None


def _sidecar(path: Path, suffix: str) -> Path:
    return path.with_suffix(suffix)


def _models(value: str) -> list[ModelKind]:
    kinds = []
    for name in value.split(","):
        name = name.strip()
        try:
            kinds.append(ModelKind(name))
        except ValueError:
            msg = f"unknown model '{name}'"
            raise ConfigError(msg, key="models") from None
    return kinds


def _floats(value: str, key: str) -> list[float]:
    try:
        return [float(v) for v in value.split(",") if v.strip()]
    except ValueError:
        msg = f"expected comma-separated numbers, got '{value}'"
        raise ConfigError(msg, key=key) from None


def _stream_flags(**flags: Any) -> dict[str, Any]:
    if flags.pop("no_shuffle", False):
        flags["no_shuffle"] = True
    return flags


@app.command()
def run(
    model: Annotated[
        str | None, typer.Option("--model", help="sohot, ht, ht-limit, st or pool")
    ] = None,
    stream: StreamOpt = None,
    csv: CsvOpt = None,
    label_column: LabelColumnOpt = None,
    instances: InstancesOpt = None,
    window: WindowOpt = None,
    reps: RepsOpt = None,
    seed: SeedOpt = None,
    alpha: AlphaOpt = None,
    gamma: GammaOpt = None,
    max_depth: MaxDepthOpt = None,
    delta: DeltaOpt = None,
    tau: TauOpt = None,
    epsilon_s: EpsilonSOpt = None,
    grace: GraceOpt = None,
    learning_rate: LearningRateOpt = None,
    leaf_prediction: LeafPredictionOpt = None,
    node_limit: NodeLimitOpt = None,
    drift_kind: DriftKindOpt = None,
    drift_at: DriftAtOpt = None,
    drift_width: DriftWidthOpt = None,
    perturbation: PerturbationOpt = None,
    noise: NoiseOpt = None,
    agrawal_functions: AgrawalOpt = None,
    pool_model: Annotated[
        str | None, typer.Option("--pool-model", help="Model kind tuned by the pool")
    ] = None,
    pool_size: Annotated[
        int | None, typer.Option("--pool-size", help="Use the first N grid points")
    ] = None,
    out: Annotated[Path | None, typer.Option("--out", "-o", help="Report CSV")] = None,
    dump_tree: Annotated[
        Path | None, typer.Option("--dump-tree", help="Write the final tree here")
    ] = None,
    plot: Annotated[
        Path | None, typer.Option("--plot", help="Plot prefix (.dat and .gp)")
    ] = None,
    no_shuffle: NoShuffleOpt = False,
    workers: WorkersOpt = None,
    config: ConfigOpt = None,
    verbose: VerboseOpt = False,
    debug: DebugOpt = False,
) -> None:
    """Run a prequential experiment

    Examples:
        sohot run --model sohot --stream sea --instances 100000 --alpha 0.3 --out report.csv
        sohot run --model ht-limit --stream agrawal --drift-at 50000 --dump-tree tree.txt
        sohot run --model pool --pool-model sohot --pool-size 4 --stream hyperplane
        sohot run --csv data.csv --label-column class --reps 5
    """
    setup_logging(verbose, debug)
    with handle_errors():
        cfg = resolve_run_config(
            _stream_flags(
                model=model,
                stream=stream,
                csv=str(csv) if csv else None,
                label_column=label_column,
                instances=instances,
                window=window,
                reps=reps,
                seed=seed,
                alpha=alpha,
                gamma=gamma,
                max_depth=max_depth,
                delta=delta,
                tau=tau,
                epsilon_s=epsilon_s,
                grace=grace,
                learning_rate=learning_rate,
                leaf_prediction=leaf_prediction,
                node_limit=node_limit,
                drift_kind=drift_kind,
                drift_at=drift_at,
                drift_width=drift_width,
                perturbation=perturbation,
                noise=noise,
                agrawal_functions=agrawal_functions,
                pool_model=pool_model,
                pool_size=pool_size,
                out=str(out) if out else None,
                dump_tree=str(dump_tree) if dump_tree else None,
                plot=str(plot) if plot else None,
                no_shuffle=no_shuffle,
                workers=workers,
            ),
            config,
        )
        _run(cfg)


def _run(cfg: RunConfig) -> None:
    console.print(
        f"[bold]Running[/bold] {cfg.model.value} on {cfg.stream.kind.value} "
        f"({cfg.prequential.n_instances} instances x {cfg.prequential.repetitions})"
    )
    result = asyncio.run(run_experiment(cfg))
    report = result.report

    report_path = write_report_csv(report, cfg.output.report)
    reps_path = write_repetitions_csv(report, _sidecar(cfg.output.report, ".reps.csv"))
    echo_path = write_config_echo(cfg)
    written = [report_path, reps_path, echo_path]
    if cfg.output.dump_tree is not None:
        cfg.output.dump_tree.write_text(result.model.dump(), encoding="utf-8")
        written.append(cfg.output.dump_tree)
    if cfg.output.plot is not None:
        written.extend(write_plot(report, cfg.output.plot, cfg.stream.drift.positions))

    ce, au = report.ce_loss, report.auroc
    console.print(
        f"✓ ce_loss [green]{fmt(ce.mean if ce else None)}[/green] "
        f"± {fmt(ce.se if ce else None)}, auroc [green]"
        f"{fmt(au.mean if au else None) or '-'}[/green] ± {fmt(au.se if au else None)}"
    )
    if report.partial:
        console.print("[yellow]! Stream ended early, report is partial[/yellow]")
    for path in written:
        console.print(f"[dim]  wrote {path}[/dim]")


@app.command()
def compare(
    models: Annotated[
        str, typer.Option("--models", help="Comma-separated model kinds")
    ] = "sohot,ht",
    stream: StreamOpt = None,
    csv: CsvOpt = None,
    label_column: LabelColumnOpt = None,
    instances: InstancesOpt = None,
    window: WindowOpt = None,
    reps: RepsOpt = None,
    seed: SeedOpt = None,
    alpha: AlphaOpt = None,
    gamma: GammaOpt = None,
    max_depth: MaxDepthOpt = None,
    delta: DeltaOpt = None,
    tau: TauOpt = None,
    grace: GraceOpt = None,
    learning_rate: LearningRateOpt = None,
    leaf_prediction: LeafPredictionOpt = None,
    node_limit: NodeLimitOpt = None,
    drift_kind: DriftKindOpt = None,
    drift_at: DriftAtOpt = None,
    drift_width: DriftWidthOpt = None,
    perturbation: PerturbationOpt = None,
    noise: NoiseOpt = None,
    agrawal_functions: AgrawalOpt = None,
    out: Annotated[
        Path, typer.Option("--out", "-o", help="Comparison CSV")
    ] = Path("compare.csv"),
    no_shuffle: NoShuffleOpt = False,
    workers: WorkersOpt = None,
    config: ConfigOpt = None,
    verbose: VerboseOpt = False,
    debug: DebugOpt = False,
) -> None:
    """Compare several models on identically seeded streams

    Examples:
        sohot compare --models sohot,ht,ht-limit,st --stream sea --reps 5
    """
    setup_logging(verbose, debug)
    with handle_errors():
        kinds = _models(models)
        cfg = resolve_run_config(
            _stream_flags(
                stream=stream,
                csv=str(csv) if csv else None,
                label_column=label_column,
                instances=instances,
                window=window,
                reps=reps,
                seed=seed,
                alpha=alpha,
                gamma=gamma,
                max_depth=max_depth,
                delta=delta,
                tau=tau,
                grace=grace,
                learning_rate=learning_rate,
                leaf_prediction=leaf_prediction,
                node_limit=node_limit,
                drift_kind=drift_kind,
                drift_at=drift_at,
                drift_width=drift_width,
                perturbation=perturbation,
                noise=noise,
                agrawal_functions=agrawal_functions,
                out=str(out),
                no_shuffle=no_shuffle,
                workers=workers,
            ),
            config,
        )
        results = asyncio.run(run_comparison(cfg, kinds))
        rows = compare_reports([r.report for r in results])
        write_compare_csv(rows, cfg.output.report)
        write_config_echo(cfg)

        table = Table(title=f"{cfg.stream.kind.value}, {cfg.prequential.repetitions} reps")
        table.add_column("Model", style="cyan")
        table.add_column("CE loss", justify="right")
        table.add_column("AUROC", justify="right")
        for row in rows:
            ce = f"{fmt(row.ce_loss_mean)} ± {fmt(row.ce_loss_se)}"
            au = f"{fmt(row.auroc_mean) or '-'} ± {fmt(row.auroc_se)}"
            table.add_row(
                row.model,
                f"[bold green]{ce}[/bold green]" if row.winner_ce_loss else ce,
                f"[bold green]{au}[/bold green]" if row.winner_auroc else au,
            )
        console.print(table)
        console.print(f"[dim]  wrote {cfg.output.report}[/dim]")


@app.command()
def transparency(
    alphas: Annotated[
        str, typer.Option("--alphas", help="Comma-separated alpha grid")
    ] = "0,0.25,0.5,0.75,1",
    include_st: Annotated[
        bool, typer.Option("--include-st", help="Add a soft tree row (alpha 1)")
    ] = False,
    stream: StreamOpt = None,
    csv: CsvOpt = None,
    label_column: LabelColumnOpt = None,
    instances: InstancesOpt = None,
    reps: RepsOpt = None,
    seed: SeedOpt = None,
    gamma: GammaOpt = None,
    max_depth: MaxDepthOpt = None,
    learning_rate: LearningRateOpt = None,
    drift_kind: DriftKindOpt = None,
    drift_at: DriftAtOpt = None,
    out: Annotated[
        Path, typer.Option("--out", "-o", help="Transparency CSV")
    ] = Path("transparency.csv"),
    no_shuffle: NoShuffleOpt = False,
    workers: WorkersOpt = None,
    config: ConfigOpt = None,
    verbose: VerboseOpt = False,
    debug: DebugOpt = False,
) -> None:
    """Trade-off between transparency and AUROC over an alpha grid

    Examples:
        sohot transparency --alphas 0,0.5,1 --stream sea --instances 20000 --include-st
    """
    setup_logging(verbose, debug)
    with handle_errors():
        grid = _floats(alphas, "alphas")
        cfg = resolve_run_config(
            _stream_flags(
                model="sohot",
                stream=stream,
                csv=str(csv) if csv else None,
                label_column=label_column,
                instances=instances,
                reps=reps,
                seed=seed,
                gamma=gamma,
                max_depth=max_depth,
                learning_rate=learning_rate,
                drift_kind=drift_kind,
                drift_at=drift_at,
                out=str(out),
                no_shuffle=no_shuffle,
                workers=workers,
            ),
            config,
        )
        for a in grid:
            if not 0.0 <= a <= 1.0:
                msg = f"alpha must lie in [0, 1], got {a}"
                raise ConfigError(msg, key="alphas")
        rows = asyncio.run(run_alpha_sweep(cfg, grid, include_st=include_st))
        write_transparency_csv(rows, cfg.output.report)
        write_config_echo(cfg)

        table = Table(title="Transparency")
        table.add_column("Model", style="cyan")
        table.add_column("alpha", justify="right")
        table.add_column("ratio", justify="right")
        table.add_column("AUROC", justify="right")
        for row in rows:
            table.add_row(
                row.model,
                fmt(row.alpha),
                fmt(row.transparency_ratio) or "-",
                fmt(row.auroc) or "-",
            )
        console.print(table)
        console.print(f"[dim]  wrote {cfg.output.report}[/dim]")


@app.command()
def version() -> None:
    """Show the sohot version"""
    console.print(f"sohot {__version__}")
