"""Experiment commands"""

from typing import Any, Optional

import click

from app.console.commands.options import (
    build_function,
    echo_rows,
    function_options,
    parse_list,
)
from app.core.exceptions import VerificationFailure
from app.core.logging import get_logger
from app.core.logging_decorator import log_exceptions
from app.core.storage import format_value
from app.schemas.experiment import ExperimentConfig, ExperimentKind, ExperimentReport
from app.services.experiments import RUNNERS
from app.services.experiments.base import write_report
from app.services.experiments.identity_sweep import HEADER as SWEEP_HEADER
from app.services.experiments.identity_sweep import run_identity_sweep
from config.experiments import identity_sweep

logger = get_logger("cli")


def echo_summary(report: ExperimentReport, written: list[Any]) -> None:
    verdict = {True: "PASS", False: "FAIL", None: "n/a"}[report.passed]
    click.echo(f"experiment: {report.experiment.value}  seed: {report.seed}  {verdict}")
    for c in report.constants:
        click.echo(f"  {c.name} = {format_value(c.value)}  [{c.method}]")
    for flag in report.flags:
        click.echo(f"  flag: {flag}")
    for path in written:
        click.echo(f"  wrote {path}")


def raise_on_failure(report: ExperimentReport) -> None:
    if report.passed is False:
        raise VerificationFailure(
            f"experiment {report.experiment.value} failed its checks",
            failures=[{"flag": flag} for flag in report.flags],
        )


@click.command(name="experiment")
@click.argument("kind", type=click.Choice([k.value for k in ExperimentKind]))
@function_options(required=False)
@click.option("--N", "n", default=None, help="Levels, comma separated")
@click.option("--M", "m", type=int, default=None, help="Sample count")
@click.option("--seed", type=int, default=None, help="Master seed")
@click.option("--t-grid", default=None, help="Tail thresholds, comma separated")
@click.option("--lambda-grid", default=None, help="Exponential moment lambdas")
@click.option("--eps-levels", default=None, help="Cancellation levels L of eps = 2^-L")
@click.option("--ensemble", type=int, default=None, help="Martingale traces")
@click.option("--C", "c", type=float, default=None, help="Growth constant of synthetic traces")
@click.option("--x-points", default=None, help="Extra points, comma separated")
@click.option("--sweep", default=None, help="Identity sweep preset")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="CSV report path")
@click.option("--table/--no-table", default=True, help="Print the row table")
@log_exceptions("cli")
def experiment(
    kind: str,
    fn: Optional[str],
    alpha: float,
    base: int,
    terms: int,
    level: Optional[float],
    shift: float,
    n: Optional[str],
    m: Optional[int],
    seed: Optional[int],
    t_grid: Optional[str],
    lambda_grid: Optional[str],
    eps_levels: Optional[str],
    ensemble: Optional[int],
    c: Optional[float],
    x_points: Optional[str],
    sweep: Optional[str],
    out: Optional[str],
    table: bool,
) -> None:
    """Run one experiment and print its summary"""
    values: dict[str, Any] = {
        "experiment": kind,
        "function": build_function(fn, alpha, base, terms, level, shift),
        "alpha": alpha,
        "n_list": parse_list(n, int, "--N"),
        "samples": m,
        "seed": seed,
        "t_grid": parse_list(t_grid, float, "--t-grid"),
        "lambda_grid": parse_list(lambda_grid, float, "--lambda-grid"),
        "eps_levels": parse_list(eps_levels, int, "--eps-levels"),
        "ensemble": ensemble,
        "bound_C": c,
        "x_points": parse_list(x_points, float, "--x-points"),
        "sweep": sweep,
        "output_path": out,
    }
    cfg = ExperimentConfig(**{k: v for k, v in values.items() if v is not None})
    logger.info("Experiment requested", context=cfg.echo())
    report = RUNNERS[cfg.experiment](cfg)
    written = write_report(report, cfg.output_path)
    if table and cfg.experiment is not ExperimentKind.IDENTITY_SWEEP:
        echo_rows(report.header, report.rows)
    echo_summary(report, written)
    raise_on_failure(report)


@click.command(name="identity")
@function_options(required=False)
@click.option(
    "--sweep",
    type=click.Choice(sorted(identity_sweep)),
    default="default",
    show_default=True,
    help="Sweep preset",
)
@click.option("--seed", type=int, default=None, help="Master seed")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="CSV report path")
@log_exceptions("cli")
def identity(
    fn: Optional[str],
    alpha: float,
    base: int,
    terms: int,
    level: Optional[float],
    shift: float,
    sweep: str,
    seed: Optional[int],
    out: Optional[str],
) -> None:
    """Run the identity sweep and print the residual table"""
    values: dict[str, Any] = {
        "experiment": ExperimentKind.IDENTITY_SWEEP,
        "function": build_function(fn, alpha, base, terms, level, shift),
        "alpha": alpha,
        "sweep": sweep,
        "seed": seed,
    }
    cfg = ExperimentConfig(**{k: v for k, v in values.items() if v is not None})
    report = run_identity_sweep(cfg)
    written = write_report(report, out)

    check = SWEEP_HEADER.index("check")
    residual = SWEEP_HEADER.index("residual")
    passed = SWEEP_HEADER.index("passed")
    summary: dict[str, list[Any]] = {}
    for row in report.rows:
        entry = summary.setdefault(row[check], [row[check], 0, 0.0, 0])
        entry[1] += 1
        if row[residual] is not None:
            entry[2] = max(entry[2], row[residual])
        if not row[passed]:
            entry[3] += 1
    echo_rows(["check", "rows", "max_residual", "failures"], list(summary.values()))
    echo_summary(report, written)
    raise_on_failure(report)
