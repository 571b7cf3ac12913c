"""
Experiment runners keyed by ExperimentKind.
"""

from collections.abc import Callable

from app.schemas.experiment import ExperimentConfig, ExperimentKind, ExperimentReport
from app.services.experiments.base import write_report
from app.services.experiments.cancellation import run_cancellation
from app.services.experiments.exp_moment import run_exp_moment
from app.services.experiments.identity_sweep import run_identity_sweep
from app.services.experiments.l2_growth import run_l2_growth
from app.services.experiments.lil import run_lil
from app.services.experiments.tail import run_tail

RUNNERS: dict[ExperimentKind, Callable[[ExperimentConfig], ExperimentReport]] = {
    ExperimentKind.L2_GROWTH: run_l2_growth,
    ExperimentKind.TAIL: run_tail,
    ExperimentKind.EXP_MOMENT: run_exp_moment,
    ExperimentKind.LIL: run_lil,
    ExperimentKind.CANCELLATION: run_cancellation,
    ExperimentKind.IDENTITY_SWEEP: run_identity_sweep,
}


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Run the configured experiment and write its report when an output path is set."""
    report = RUNNERS[cfg.experiment](cfg)
    write_report(report, cfg.output_path)
    return report


__all__ = [
    "RUNNERS",
    "run_experiment",
    "run_cancellation",
    "run_exp_moment",
    "run_identity_sweep",
    "run_l2_growth",
    "run_lil",
    "run_tail",
]
