"""
Unit tests for the experiment runners
"""

import json
import math

import numpy as np
import pytest
from pydantic import ValidationError

from app.core.exceptions import ConfigurationError, PreconditionError
from app.core.storage import Storage
from app.schemas.experiment import ExperimentConfig, ExperimentKind
from app.schemas.function import FunctionKind, HolderFunction
from app.services.coefficients import coefficient_service
from app.services.experiments import RUNNERS, run_experiment
from app.services.experiments.base import (
    lil_scale,
    prepare_function,
    relative_spread,
    sample_points,
    triple_log_scale,
    write_report,
)
from app.services.experiments.cancellation import octave_count, run_cancellation
from app.services.experiments.exp_moment import run_exp_moment
from app.services.experiments.identity_sweep import HEADER as SWEEP_HEADER
from app.services.experiments.identity_sweep import run_identity_sweep
from app.services.experiments.l2_growth import run_l2_growth
from app.services.experiments.lil import checkpoints, run_lil
from app.services.experiments.tail import fit_subgaussian, run_tail, tail_verdict


def _config(kind: ExperimentKind, **values) -> ExperimentConfig:
    return ExperimentConfig(experiment=kind, **values)


def test_every_kind_has_a_runner():
    assert set(RUNNERS) == set(ExperimentKind)


def test_sample_points_avoid_dyadic_rationals():
    xs = sample_points(200, seed=3, level=6, exclusion=1e-3)
    grid = xs * 64
    assert xs.size == 200
    assert ((xs >= 0) & (xs < 1)).all()
    assert (abs(grid - grid.round()) / 64 > 1e-3).all()
    assert (sample_points(200, seed=3, level=6, exclusion=1e-3) == xs).all()


def test_prepare_function(lacunary: HolderFunction, sign_power: HolderFunction):
    assert prepare_function(lacunary, 8).terms == 48
    assert prepare_function(lacunary.model_copy(update={"terms": 60}), 8).terms == 60
    assert prepare_function(sign_power, 8) is sign_power


def test_normalizations():
    assert lil_scale(16) == pytest.approx(math.sqrt(16 * math.log(math.log(16))))
    assert triple_log_scale(3) is None
    L4 = 4 * math.log(2.0)
    assert triple_log_scale(4) == pytest.approx(math.sqrt(L4 * math.log(math.log(L4))))
    L = 32 * math.log(2.0)
    assert triple_log_scale(32) == pytest.approx(math.sqrt(L * math.log(math.log(L))))
    assert relative_spread([1.0, 1.5, None]) == pytest.approx(0.5)
    assert relative_spread([2.0]) is None


def test_helpers():
    assert octave_count(4, 6) == 3
    assert octave_count(3, 6) == 4
    assert checkpoints(20) == [4, 8, 16]


def test_fit_subgaussian_recovers_constant():
    t = np.array([0.5, 1.0, 1.5, 2.0])
    c, residual = fit_subgaussian(t, 0.8 * np.exp(-t * t / 0.8))
    assert c == pytest.approx(0.8, rel=1e-3)
    assert residual < 1e-4
    assert fit_subgaussian(t, np.zeros(4)) == (None, None)


def test_l2_growth_lacunary(lacunary: HolderFunction):
    cfg = _config(ExperimentKind.L2_GROWTH, function=lacunary, n_list=[4, 8], samples=256)
    report = run_l2_growth(cfg)
    assert report.header[0] == "N"
    assert report.column("N") == [4, 8]
    assert all(v is not None for v in report.column("spectral_mean_square"))
    assert report.constant("A_alpha") == pytest.approx(
        coefficient_service.limit_A_closed_form(0.5), rel=1e-8
    )
    assert report.constant("l2_slope") is not None
    increments = report.column("increment_per_level")
    assert increments[0] is None
    assert increments[1] == pytest.approx(
        (report.rows[1][3] - report.rows[0][3]) / 4, rel=1e-12
    )
    assert report.constant("l2_increment") == pytest.approx(increments[1], rel=1e-12)
    assert report.constant("boundary_deficit") is not None
    assert report.passed in (True, False)
    assert report.extras["terms"] == 48


def test_l2_growth_is_deterministic(lacunary: HolderFunction):
    cfg = _config(ExperimentKind.L2_GROWTH, function=lacunary, n_list=[3, 6], samples=64, seed=9)
    first, second = run_l2_growth(cfg), run_l2_growth(cfg)
    assert first.rows == second.rows
    assert first.wall_clock is None


def test_constant_function_is_vacuous(constant: HolderFunction):
    report = run_l2_growth(
        _config(ExperimentKind.L2_GROWTH, function=constant, n_list=[2, 4], samples=16)
    )
    assert any(flag.startswith("vacuous") for flag in report.flags)
    assert report.passed is None


def test_runner_needs_a_function():
    with pytest.raises(ConfigurationError):
        run_tail(_config(ExperimentKind.TAIL, n_list=[4]))


def test_tail(lacunary: HolderFunction):
    cfg = _config(
        ExperimentKind.TAIL, function=lacunary, n_list=[4, 8], samples=256, t_grid=[0.1, 0.2, 0.4]
    )
    report = run_tail(cfg)
    assert len(report.rows) == 6
    assert all(0.0 <= p <= 1.0 for p in report.column("exceedance"))
    assert [c.name for c in report.constants] == ["c_hat[N=4]", "c_hat[N=8]", "c_hat_spread"]
    assert report.extras["seminorm"] > 0
    for N in (4, 8):
        p = [row[3] for row in report.rows if row[0] == N]
        assert all(b <= a for a, b in zip(p, p[1:]))


def test_tail_verdict_needs_positive_exceedances():
    assert tail_verdict(np.array([0.12, 0.03, 0.004]), -1.0, 0.1, True)
    assert not tail_verdict(np.array([0.12, 0.03, 0.0]), -1.0, 0.1, True)
    assert not tail_verdict(np.array([0.12, 0.12, 0.01]), -1.0, 0.1, True)
    assert not tail_verdict(np.array([0.12, 0.03, 0.004]), None, 0.1, True)
    assert not tail_verdict(np.array([0.12, 0.03, 0.004]), -1.0, 0.9, True)
    assert not tail_verdict(np.array([0.12]), -1.0, None, True)


def test_default_levels_follow_the_experiment():
    assert _config(ExperimentKind.L2_GROWTH).n_list == [8, 16, 24, 32]
    assert _config(ExperimentKind.EXP_MOMENT).n_list == [8, 12, 16]
    assert _config(ExperimentKind.TAIL, n_list=None).n_list == [8, 12, 16]
    assert _config(ExperimentKind.LIL, n_list=[4, 8]).n_list == [4, 8]


def test_exp_moment_levels_are_bounded():
    with pytest.raises(ValidationError, match="DENSE_MAX_LEVEL"):
        _config(ExperimentKind.EXP_MOMENT, n_list=[8, 30])


def test_exp_moment_synthetic():
    cfg = _config(
        ExperimentKind.EXP_MOMENT, n_list=[4, 8], lambda_grid=[0.1, 0.2], ensemble=8, seed=2
    )
    report = run_exp_moment(cfg)
    assert len(report.rows) == 4
    assert report.extras["source"] == "synthetic"
    assert report.extras["maximal_holds"]
    assert report.constant("c_extremal") == pytest.approx(
        max(lam * N / (1 + lam * lam * N) for lam in (0.1, 0.2) for N in (4, 8))
    )
    assert report.flags[0].startswith("extremal trace")
    assert len(report.flags) == 1


def test_exp_moment_from_function(sign_power: HolderFunction):
    cfg = _config(
        ExperimentKind.EXP_MOMENT,
        function=sign_power,
        n_list=[4, 6],
        lambda_grid=[0.1],
        ensemble=4,
    )
    report = run_exp_moment(cfg)
    assert report.extras["source"] == "sign-power"
    assert report.extras["maximal_holds"]


def test_exp_moment_needs_an_ensemble():
    with pytest.raises(PreconditionError):
        run_exp_moment(_config(ExperimentKind.EXP_MOMENT, n_list=[4], ensemble=0))


def test_lil_martingale_paths():
    report = run_lil(_config(ExperimentKind.LIL, n_list=[3, 8], ensemble=8))
    assert report.column("N") == [3, 4, 8]
    assert report.column("checkpoint") == [False, True, True]
    assert set(report.column("source")) == {"martingale"}
    assert report.constant("c_T") > 0


def test_lil_lacunary(lacunary: HolderFunction):
    cfg = _config(ExperimentKind.LIL, function=lacunary, n_list=[3, 8], samples=64, ensemble=0)
    report = run_lil(cfg)
    assert set(report.column("source")) == {"lacunary"}
    assert all(v is not None for v in report.column("max_weiss_ratio"))
    assert report.constant("A_alpha") is not None


def test_lil_preconditions(lacunary: HolderFunction):
    with pytest.raises(PreconditionError):
        run_lil(_config(ExperimentKind.LIL, n_list=[2, 8], ensemble=4))
    with pytest.raises(PreconditionError):
        run_lil(_config(ExperimentKind.LIL, n_list=[4, 8], ensemble=0))


def test_cancellation_weierstrass(weierstrass: HolderFunction):
    cfg = _config(
        ExperimentKind.CANCELLATION, function=weierstrass, eps_levels=[4, 6], x_points=[0.3, 0.7]
    )
    report = run_cancellation(cfg)
    assert len(report.rows) == 4
    assert report.constant("r0") > 0
    assert report.constant("octave_c") is not None
    assert len(report.extras["octave_rows"]) == 2 * octave_count(4, 6)
    absolute, signed = report.column("abs_ratio"), report.column("signed_ratio")
    assert min(absolute) == report.constant("r0")
    assert all(s <= 1.1 * a + 1e-8 for a, s in zip(absolute, signed))
    finest = [s for s, row in zip(signed, report.rows) if row[1] == 6]
    assert report.constant("signed_finest") == max(finest)
    fraction = report.extras["signed_fraction"]
    assert report.passed is (report.constant("signed_finest") <= fraction * report.constant("r0"))


def test_cancellation_constant_is_vacuous(constant: HolderFunction):
    cfg = _config(ExperimentKind.CANCELLATION, function=constant, eps_levels=[2, 3], x_points=[0.3])
    report = run_cancellation(cfg)
    assert any(flag.startswith("vacuous") for flag in report.flags)
    assert report.passed is None


def test_identity_sweep_quick():
    """Test that every exact identity holds over the quick preset."""
    report = run_identity_sweep(_config(ExperimentKind.IDENTITY_SWEEP, sweep="quick"))
    checks = set(report.column("check"))
    assert checks == {
        "lemma",
        "decomposition",
        "error_bound",
        "summation_by_parts",
        "energy",
        "martingale",
    }
    assert len(report.rows) == 132
    assert report.header == SWEEP_HEADER
    assert report.passed is True
    assert not report.flags
    assert report.constant("a_n_over_majorant") <= 1.0 + 1e-9


def test_identity_sweep_single_function(lacunary: HolderFunction):
    f = lacunary.model_copy(update={"terms": 0})
    report = run_identity_sweep(
        _config(ExperimentKind.IDENTITY_SWEEP, function=f, sweep="quick")
    )
    assert report.extras["functions"] == [f.model_copy(update={"terms": 8}).descriptor()]
    assert set(report.column("kind")) >= {FunctionKind.LACUNARY_SINE.value}


def test_identity_sweep_unknown_preset():
    with pytest.raises(ConfigurationError):
        run_identity_sweep(_config(ExperimentKind.IDENTITY_SWEEP, sweep="nonexistent"))


def test_write_report(output_dir: Storage, constant: HolderFunction):
    report = run_l2_growth(
        _config(ExperimentKind.L2_GROWTH, function=constant, n_list=[2], samples=4)
    )
    written = write_report(report, "runs/l2.csv")
    assert [p.name for p in written] == ["l2.csv", "l2.json"]
    assert written[0].read_text().splitlines()[0] == ",".join(report.header)
    data = json.loads(written[1].read_text())
    assert data["experiment"] == "l2"
    assert data["seed"] == report.seed
    assert write_report(report, None) == []


def test_run_experiment_writes_output(output_dir: Storage, constant: HolderFunction):
    cfg = _config(
        ExperimentKind.L2_GROWTH,
        function=constant,
        n_list=[2],
        samples=4,
        output_path="runs/report.csv",
    )
    run_experiment(cfg)
    assert output_dir.exists("runs/report.csv")
    assert output_dir.exists("runs/report.json")


@pytest.mark.slow
def test_l2_growth_acceptance(lacunary: HolderFunction):
    """Test the per-level growth of the mean square against A(alpha)^2 / 2."""
    report = run_l2_growth(_config(ExperimentKind.L2_GROWTH, function=lacunary))
    half_A2 = 8 * math.pi**2
    assert report.column("N") == [8, 16, 24, 32]
    assert report.passed is True
    assert report.constant("l2_increment") == pytest.approx(half_A2, rel=0.15)
    assert 0.7 < report.column("ratio_to_half_A2")[-1] < 0.95


@pytest.mark.slow
def test_exp_moment_acceptance():
    report = run_exp_moment(_config(ExperimentKind.EXP_MOMENT))
    assert report.passed is True
    assert report.extras["maximal_holds"]


@pytest.mark.slow
def test_identity_sweep_acceptance():
    report = run_identity_sweep(_config(ExperimentKind.IDENTITY_SWEEP))
    assert report.passed is True


@pytest.mark.slow
def test_tail_acceptance(lacunary: HolderFunction):
    """Test that exceedances at N = 16 fall in t with a negative log slope."""
    cfg = _config(ExperimentKind.TAIL, function=lacunary, t_grid=[0.5, 1.0, 1.5, 2.0])
    report = run_tail(cfg)
    p = [row[3] for row in report.rows if row[0] == 16]
    assert all(b < a for a, b in zip(p, p[1:]))
    assert p[-1] > 0
    final = next(c for c in report.constants if c.name == "c_hat[N=16]")
    assert final.diagnostics["log_p_vs_t2_slope"] < 0


@pytest.mark.slow
def test_lil_acceptance(lacunary: HolderFunction):
    cfg = _config(
        ExperimentKind.LIL, function=lacunary, n_list=[4, 8, 16, 32], samples=64, ensemble=0
    )
    report = run_lil(cfg)
    A = coefficient_service.limit_A(0.5)
    peak = report.constant("lil_function_max")
    assert report.extras["finite"]
    assert 0.1 * A <= peak <= 4.0 * A * max(report.extras["seminorm"], 1.0)
    assert report.passed is True


@pytest.mark.slow
def test_cancellation_acceptance():
    """Test the b = 64 Weierstrass run: absolute floor and octave law."""
    f = HolderFunction(kind=FunctionKind.WEIERSTRASS_COS, alpha=0.5, base=64, terms=6)
    cfg = _config(
        ExperimentKind.CANCELLATION,
        function=f,
        samples=32,
        eps_levels=[8, 10, 12, 14, 16, 18, 20],
    )
    report = run_cancellation(cfg)
    assert len(report.rows) == 32 * 7
    assert report.constant("r0") > 0
    absolute = np.array(report.column("abs_ratio")).reshape(32, 7)
    # the absolute integral keeps pace with ln(1/eps)
    assert absolute[:, -1].mean() >= 0.5 * absolute[:, 0].mean()
    octave = next(c for c in report.constants if c.name == "octave_c")
    assert octave.value > 0
    assert octave.diagnostics["r_value"] > 0.5
    assert isinstance(report.passed, bool)
