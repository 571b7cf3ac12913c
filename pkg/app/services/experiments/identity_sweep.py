"""
Identity Sweep
Residuals of the exact identities over a grid of functions, points, grid
dilations and levels: the translation-average identity, the decomposition of
the averaged Gamma transform with its error majorant, and the algebraic
martingale identities on random and function-derived traces.
"""

import time
from typing import Any, Optional

import numpy as np

from app.core.exceptions import ConfigurationError, OscillationToolkitError
from app.core.logging import get_logger
from app.core.logging_decorator import log_exceptions
from app.core.parallel import run_indexed
from app.schemas.dyadic import GammaTrace, MartingaleTrace
from app.schemas.experiment import ExperimentConfig, ExperimentReport, FittedConstant
from app.schemas.function import FunctionKind, HolderFunction
from app.services.averaging import averaging_service
from app.services.dyadic import dyadic_service
from app.services.experiments.base import build_report, sample_points
from app.services.funcspace import funcspace_service
from config.experiments import identity_sweep, tolerances

logger = get_logger("harness")

HEADER = [
    "check",
    "kind",
    "alpha",
    "x",
    "rho",
    "level",
    "lhs",
    "rhs",
    "a_n",
    "residual",
    "tolerance",
    "passed",
    "error",
]

Row = list[Any]


def preset_functions(kinds: list[str], alpha: float, lacunary_terms: int) -> list[HolderFunction]:
    """The functions of a sweep preset, all with exponent ``alpha``."""
    functions = []
    for name in kinds:
        kind = FunctionKind(name)
        data: dict[str, Any] = {"kind": kind, "alpha": alpha}
        if kind in (FunctionKind.CONSTANT, FunctionKind.LINEAR):
            data["level"] = 1.0
        elif kind.is_series:
            data["terms"] = lacunary_terms
        functions.append(HolderFunction(**data))
    return functions


def _row(
    check: str,
    kind: str,
    alpha: float,
    x: Optional[float],
    rho: Optional[float],
    level: int,
    lhs: Optional[float],
    rhs: Optional[float],
    residual: Optional[float],
    tol: float,
    a_n: Optional[float] = None,
    error: Optional[str] = None,
    magnitude: Optional[float] = None,
) -> Row:
    """One sweep row; the tolerance scales with max(1, magnitude), |rhs| by default."""
    if magnitude is None:
        magnitude = abs(rhs) if rhs is not None else 0.0
    tolerance = tol * max(1.0, magnitude)
    passed = error is None and residual is not None and residual <= tolerance
    return [check, kind, alpha, x, rho, level, lhs, rhs, a_n, residual, tolerance, passed, error]


def _lemma_task(task: tuple[HolderFunction, float, float, int]) -> list[Row]:
    f, x, rho, k_max = task
    where = (f.kind.value, f.alpha, x, rho)
    tol = tolerances["lemma"]
    rows = []
    for k in range(1, k_max + 1):
        try:
            lhs, rhs = averaging_service.lemma31_check(f, x, rho, k)
        except OscillationToolkitError as e:
            rows.append(_row("lemma", *where, k, None, None, None, tol, error=str(e)))
            continue
        rows.append(_row("lemma", *where, k, lhs, rhs, abs(lhs - rhs), tol))
    return rows


def _decomposition_task(task: tuple[HolderFunction, float, int]) -> list[Row]:
    f, x, n_max = task
    where = (f.kind.value, f.alpha, x, None)
    tol = tolerances["decomposition"]
    try:
        reports = averaging_service.decomposition_levels(f, x, n_max)
    except OscillationToolkitError as e:
        return [_row("decomposition", *where, n_max, None, None, None, tol, error=str(e))]
    rows = []
    for r in reports:
        closed = r.main / (1.0 + r.alpha) + r.a_n
        excess = 0.0 if r.bound_holds else abs(r.a_n) - r.bound
        rows += [
            _row("decomposition", *where, r.n, r.lhs, closed, r.residual, tol, a_n=r.a_n),
            _row("error_bound", *where, r.n, abs(r.a_n), r.bound, excess, tol, a_n=r.a_n),
        ]
    return rows


def _trace_rows(trace: MartingaleTrace, gamma: GammaTrace, kind: str, alpha: float) -> list[Row]:
    """Summation by parts, energy (after centring) and child averages of one trace."""
    sbp = dyadic_service.summation_by_parts_residual(trace, gamma)
    centred = trace if float(trace.levels[0][0]) == 0.0 else dyadic_service.subtract_initial(trace)
    energy, variation = dyadic_service.energy_check(centred)
    child = dyadic_service.martingale_residual(trace)
    where = (kind, alpha, None, trace.rho, trace.N)
    peak = max(float(np.max(np.abs(level))) for level in trace.levels)
    exact = tolerances["summation_by_parts"]
    return [
        _row("summation_by_parts", *where, None, 0.0, sbp, exact, magnitude=peak),
        _row("energy", *where, energy, variation, abs(energy - variation), tolerances["energy"]),
        _row("martingale", *where, None, 0.0, child, exact, magnitude=peak),
    ]


def _random_trace_task(task: tuple[float, int, int, int]) -> list[Row]:
    beta, level, seed, index = task
    trace = dyadic_service.sample_random_martingale(beta, 1.0, level, seed, stream=index)
    gamma = dyadic_service.transforms(trace, 1.0 - beta)
    return _trace_rows(trace, gamma, trace.source, 1.0 - beta)


def _function_trace_task(task: tuple[HolderFunction, float, int, float]) -> list[Row]:
    f, rho, level, H = task
    trace = dyadic_service.martingale_from_function(f, rho, level, seminorm=H)
    gamma = dyadic_service.transforms(trace, f.alpha)
    return _trace_rows(trace, gamma, f.kind.value, f.alpha)


@log_exceptions("harness")
def run_identity_sweep(cfg: ExperimentConfig) -> ExperimentReport:
    started = time.perf_counter()
    if cfg.sweep not in identity_sweep:
        raise ConfigurationError(
            f"unknown sweep preset {cfg.sweep!r}", choices=sorted(identity_sweep)
        )
    preset = identity_sweep[cfg.sweep]
    functions = (
        [cfg.function]
        if cfg.function is not None
        else preset_functions(preset["kinds"], cfg.alpha, preset["lacunary_terms"])
    )
    # lemma quadrature resolves every retained frequency: unset series get the preset's terms
    functions = [
        f.model_copy(update={"terms": preset["lacunary_terms"]})
        if f.kind.is_series and f.terms == 0
        else f
        for f in functions
    ]
    depth = max(preset["k_max"], preset["n_max"])
    xs = [float(x) for x in sample_points(preset["points"], cfg.seed, depth)]
    rhos = preset["rhos"]

    lemma_tasks = [(f, x, rho, preset["k_max"]) for f in functions for x in xs for rho in rhos]
    decomposition_tasks = [(f, x, preset["n_max"]) for f in functions for x in xs]
    random_tasks = [
        (cfg.beta, preset["trace_level"], cfg.seed, i) for i in range(preset["traces"])
    ]
    function_tasks = [
        (f, rho, preset["trace_level"], funcspace_service.effective_seminorm(f, seed=cfg.seed))
        for f in functions
        for rho in rhos
    ]

    rows: list[Row] = []
    for chunk in run_indexed(_lemma_task, lemma_tasks):
        rows += chunk
    for chunk in run_indexed(_decomposition_task, decomposition_tasks):
        rows += chunk
    for chunk in run_indexed(_random_trace_task, random_tasks):
        rows += chunk
    for chunk in run_indexed(_function_trace_task, function_tasks):
        rows += chunk

    failures = [row for row in rows if not row[HEADER.index("passed")]]
    worst: dict[str, float] = {}
    for row in rows:
        residual = row[HEADER.index("residual")]
        if residual is not None:
            worst[row[0]] = max(worst.get(row[0], 0.0), residual)
    constants = [
        FittedConstant(name=f"max_residual[{check}]", value=value, method="max over the sweep")
        for check, value in sorted(worst.items())
    ]
    bounds = [
        row[HEADER.index("lhs")] / row[HEADER.index("rhs")]
        for row in rows
        if row[0] == "error_bound" and row[HEADER.index("rhs")]
    ]
    if bounds:
        constants.append(
            FittedConstant(
                name="a_n_over_majorant",
                value=max(bounds),
                method="max over the sweep of |a_n| / explicit majorant",
            )
        )
    flags = [f"{len(failures)} of {len(rows)} checks outside tolerance"] if failures else []
    if any(row[HEADER.index("error")] for row in rows):
        flags.append("quadrature or precondition failures listed in the error column")
    logger.info(
        "Identity sweep evaluated",
        context={"preset": cfg.sweep, "rows": len(rows), "failures": len(failures)},
    )
    return build_report(
        cfg,
        HEADER,
        rows,
        constants,
        flags,
        not failures,
        started,
        extras={
            "preset": cfg.sweep,
            "functions": [f.descriptor() for f in functions],
            "tolerances": tolerances,
        },
    )
