"""
Cancellation Experiment
Absolute against signed oscillation per unit of ln(1/eps): the absolute
integral stays bounded below while the signed one cancels.
"""

import math
import time
from typing import Any

import numpy as np
from scipy import stats

from app.core.logging_decorator import log_exceptions
from app.schemas.experiment import ExperimentConfig, ExperimentReport, FittedConstant
from app.schemas.function import FunctionKind, HolderFunction
from app.schemas.quadrature import QuadratureSpec
from app.services.experiments.base import (
    build_report,
    prepare_function,
    require_function,
    sample_points,
)
from app.services.funcspace import funcspace_service
from app.services.oscillation import oscillation_service
from config.experiments import cancellation

HEADER = ["x", "eps_level", "eps", "abs_ratio", "signed_ratio"]


def octave_count(base: int, level: int) -> int:
    """Smallest K with base^K >= 2^level."""
    K = max(1, math.ceil(level * math.log(2.0) / math.log(base)))
    while float(base) ** K < 2.0**level:
        K += 1
    return K


def octave_statistic(
    f: HolderFunction, x: float, k: int, quad: QuadratureSpec, band_rel_tol: float
) -> float:
    """Absolute oscillation integral over the octave [b^-k / 2, 2 b^-k]."""
    scale = float(f.base) ** -k
    needed = funcspace_service.truncation_terms(
        f.alpha, f.base, 2.0 * band_rel_tol * scale**f.alpha
    )
    g = f.model_copy(update={"terms": min(f.terms, needed)})
    return oscillation_service.abs_band_integral(
        g, x, 0.5 * scale, min(2.0 * scale, 1.0), quad
    ).value


@log_exceptions("harness")
def run_cancellation(cfg: ExperimentConfig) -> ExperimentReport:
    started = time.perf_counter()
    levels = cfg.eps_levels
    finest = levels[-1]
    f = prepare_function(require_function(cfg), finest)
    quad = QuadratureSpec.default()
    band_rel_tol = cancellation["band_rel_tol"]
    weierstrass = f.kind is FunctionKind.WEIERSTRASS_COS

    xs = (
        np.asarray(cfg.x_points, dtype=float)
        if cfg.x_points
        else sample_points(cfg.samples, cfg.seed, finest)
    )
    signed = np.abs(oscillation_service.profile_matrix(f, xs, finest))

    rows: list[list[Any]] = []
    abs_ratios = []
    signed_finest = 0.0
    for i, x in enumerate(xs):
        absolute = oscillation_service.abs_theta_profile(
            f, float(x), finest, quad, band_rel_tol=band_rel_tol
        ).theta
        for L in levels:
            log_inv = L * math.log(2.0)
            a_ratio = absolute[L - 1] / log_inv
            s_ratio = float(signed[L - 1, i]) / log_inv
            abs_ratios.append(a_ratio)
            rows.append([float(x), L, 2.0**-L, a_ratio, s_ratio])
            if L == finest:
                signed_finest = max(signed_finest, s_ratio)

    r0 = min(abs_ratios) if abs_ratios else 0.0
    fraction = cancellation["signed_fraction"]
    constants = [
        FittedConstant(
            name="r0",
            value=r0,
            method="min over sampled x and eps of abs_theta / ln(1/eps)",
            diagnostics={"band_rel_tol": band_rel_tol},
        ),
        FittedConstant(
            name="signed_finest",
            value=signed_finest,
            method=f"max over sampled x of |theta| / ln(1/eps) at eps = 2^-{finest}",
        ),
    ]
    flags: list[str] = []
    extras: dict[str, Any] = {"terms": f.terms, "signed_fraction": fraction}

    if weierstrass:
        K = octave_count(f.base, finest)
        sines, values = [], []
        octave_rows = []
        for x in xs:
            for k in range(1, K + 1):
                q = octave_statistic(f, float(x), k, quad, band_rel_tol)
                s = abs(math.sin(float(f.base) ** k * float(x)))
                sines.append(s)
                values.append(q)
                octave_rows.append([float(x), k, s, q])
        extras["octave_rows"] = octave_rows
        if len(set(sines)) >= 2:
            fit = stats.linregress(sines, values)
            constants.append(
                FittedConstant(
                    name="octave_c",
                    value=float(fit.slope),
                    method="least squares of the octave integral against |sin(b^k x)|",
                    diagnostics={
                        "c_alpha_b": float(-fit.intercept),
                        "r_value": float(fit.rvalue),
                        "octaves": K,
                    },
                )
            )

    if r0 == 0 and signed_finest == 0:
        flags.append("vacuous: oscillation vanishes identically")
    passed = None
    if weierstrass:
        passed = r0 > 0 and signed_finest <= fraction * r0
    return build_report(cfg, HEADER, rows, constants, flags, passed, started, extras=extras)
