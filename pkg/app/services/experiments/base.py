"""
Experiment Harness Base
Sample points, function preparation, report assembly and report files shared
by every experiment runner.
"""

import math
import time
from collections.abc import Sequence
from pathlib import Path
from typing import Any, Optional

import numpy as np
from numpy.typing import NDArray
from scipy import special

from app import __version__
from app.core.exceptions import ConfigurationError
from app.core.logging import get_logger
from app.core.parallel import task_rng
from app.core.storage import storage
from app.schemas.experiment import (
    ExperimentConfig,
    ExperimentReport,
    FittedConstant,
)
from app.schemas.function import FunctionKind, HolderFunction
from app.services.funcspace import funcspace_service
from config import settings
from config.experiments import experiment_defaults

logger = get_logger("harness")

# series tails below this are invisible next to the quadrature tolerances
_SERIES_TAIL = 1e-12
# dyadic rationals finer than this are indistinguishable in double precision
_MAX_EXCLUSION_LEVEL = 52


def sample_points(
    count: int,
    seed: int,
    level: int,
    exclusion: Optional[float] = None,
    stream: int = 0,
) -> NDArray[np.float64]:
    """
    ``count`` uniform points of [0, 1) away from the dyadic rationals
    j 2^-level by more than ``exclusion``.
    """
    exclusion = experiment_defaults["kink_exclusion"] if exclusion is None else exclusion
    scale = 2.0 ** min(level, _MAX_EXCLUSION_LEVEL)
    rng = task_rng(seed, stream)
    points: list[NDArray[np.float64]] = []
    found = 0
    while found < count:
        draw = rng.uniform(0.0, 1.0, max(count - found, 16))
        grid = draw * scale
        keep = draw[np.abs(grid - np.round(grid)) / scale > exclusion]
        keep = keep[: count - found]
        points.append(keep)
        found += keep.size
    return np.concatenate(points) if points else np.empty(0)


def require_function(cfg: ExperimentConfig) -> HolderFunction:
    if cfg.function is None:
        raise ConfigurationError(
            f"experiment {cfg.experiment.value} needs a function", experiment=cfg.experiment.value
        )
    return cfg.function


def prepare_function(f: HolderFunction, n_max: int) -> HolderFunction:
    """
    Series with enough terms for levels up to ``n_max``: lacunary series keep
    spectral_margin terms past the deepest level, Weierstrass series run until
    their tail is negligible. Explicit larger truncations are kept.
    """
    if f.kind is FunctionKind.LACUNARY_SINE:
        needed = n_max + experiment_defaults["spectral_margin"]
    elif f.kind is FunctionKind.WEIERSTRASS_COS:
        needed = funcspace_service.truncation_terms(f.alpha, f.base, _SERIES_TAIL)
    else:
        return f
    if f.terms >= needed:
        return f
    return f.model_copy(update={"terms": needed})


def lil_scale(N: int) -> float:
    """sqrt(N ln ln N); needs N >= 3."""
    return math.sqrt(N * math.log(math.log(N)))


def triple_log_scale(N: int) -> Optional[float]:
    """sqrt(L ln ln L) with L = ln(2^N) = N ln 2; None while ln ln L <= 0."""
    L = N * math.log(2.0)
    inner = math.log(L) if L > 1 else 0.0
    if inner <= 1.0:
        return None
    return math.sqrt(L * math.log(inner))


def log_mean_exp(values: NDArray[np.float64], axis: Optional[int] = None) -> Any:
    """log of the mean of exp(values), overflow-free."""
    count = values.size if axis is None else values.shape[axis]
    return special.logsumexp(values, axis=axis) - math.log(count)


def relative_spread(values: Sequence[float]) -> Optional[float]:
    """(max - min) / min over positive values; None with fewer than two."""
    positive = [v for v in values if v is not None and v > 0]
    if len(positive) < 2:
        return None
    return (max(positive) - min(positive)) / min(positive)


def build_report(
    cfg: ExperimentConfig,
    header: list[str],
    rows: list[list[Any]],
    constants: list[FittedConstant],
    flags: list[str],
    passed: Optional[bool],
    started: float,
    extras: Optional[dict[str, Any]] = None,
) -> ExperimentReport:
    """Assemble a report; wall-clock is kept only when OSC_REPORT_TIMING is set."""
    report = ExperimentReport(
        experiment=cfg.experiment,
        config=cfg.echo(),
        header=header,
        rows=rows,
        constants=constants,
        flags=flags,
        passed=passed,
        seed=cfg.seed,
        version=__version__,
        wall_clock=time.perf_counter() - started if settings.OSC_REPORT_TIMING else None,
        extras=extras or {},
    )
    logger.info(
        "Experiment finished",
        context={
            "experiment": cfg.experiment.value,
            "rows": len(rows),
            "passed": passed,
            "flags": len(flags),
        },
    )
    return report


def write_report(report: ExperimentReport, output_path: Optional[str]) -> list[Path]:
    """CSV table at ``output_path`` and the full JSON report beside it."""
    if not output_path:
        return []
    target = Path(output_path)
    json_path = target.with_suffix(".json") if target.suffix != ".json" else target
    written = [storage().put_json(json_path, report)]
    if target.suffix != ".json":
        written.insert(0, storage().put_csv(target, report.header, report.rows))
    return written
