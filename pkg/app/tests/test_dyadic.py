"""
Unit tests for the dyadic martingale service
"""

import numpy as np
import pytest

from app.core.exceptions import PreconditionError
from app.core.storage import Storage
from app.schemas.function import HolderFunction
from app.services.dyadic import dyadic_service
from config import settings


def test_cell_of_puts_boundaries_right():
    cell = dyadic_service.cell_of(1.0, 3, 0.5)
    assert cell.j == 4
    assert cell.contains(0.5)
    cell = dyadic_service.cell_of(1.5, 2, 0.4)
    assert (cell.j, cell.lo, cell.hi) == (1, 0.375, 0.75)
    assert [c.j for c in cell.children()] == [2, 3]
    with pytest.raises(PreconditionError):
        dyadic_service.cell_of(1.0, -1, 0.2)


def test_function_trace_is_a_martingale(sign_power: HolderFunction):
    """Test the child-average identity and the growth bound H rho^-beta 2^(k beta)."""
    trace = dyadic_service.martingale_from_function(sign_power, 1.5, 8)
    assert [level.size for level in trace.levels] == [2**k for k in range(9)]
    assert dyadic_service.martingale_residual(trace) <= 1e-12
    assert trace.bound_C == pytest.approx(2.0**0.5 * 1.5**-0.5)
    assert dyadic_service.growth_holds(trace)


def test_function_trace_preconditions(sign_power: HolderFunction):
    with pytest.raises(PreconditionError):
        dyadic_service.martingale_from_function(sign_power, 2.5, 4)
    with pytest.raises(PreconditionError):
        dyadic_service.martingale_from_function(sign_power, 1.0, settings.DENSE_MAX_LEVEL + 1)


def test_summation_by_parts(sign_power: HolderFunction):
    trace = dyadic_service.martingale_from_function(sign_power, 1.25, 10)
    gamma = dyadic_service.transforms(trace, sign_power.alpha)
    assert dyadic_service.summation_by_parts_residual(trace, gamma) <= 1e-12


def test_transforms_need_matching_alpha(sign_power: HolderFunction):
    trace = dyadic_service.martingale_from_function(sign_power, 1.0, 3)
    with pytest.raises(PreconditionError):
        dyadic_service.transforms(trace, 0.3)


def test_gamma_matches_pointwise(sign_power: HolderFunction):
    """Test the dense Gamma_n against the per-point weighted difference sum."""
    rho, n = 1.5, 6
    f = sign_power.model_copy(update={"shift": 0.4})
    trace = dyadic_service.martingale_from_function(f, rho, n)
    gamma = dyadic_service.transforms(trace, f.alpha)
    midpoints = (np.arange(2**n) + 0.5) * rho * 2.0**-n
    pointwise = dyadic_service.gamma_pointwise(f, rho, midpoints, n)
    assert np.allclose(gamma.gamma[n], pointwise, rtol=1e-10, atol=1e-10)


def test_energy_after_subtracting_initial(linear: HolderFunction, sign_power: HolderFunction):
    shifted = sign_power.model_copy(update={"shift": 0.3})
    trace = dyadic_service.martingale_from_function(shifted, 1.0, 9)
    with pytest.raises(PreconditionError):
        dyadic_service.energy_check(trace)
    lhs, rhs = dyadic_service.energy_check(dyadic_service.subtract_initial(trace))
    assert lhs == pytest.approx(rhs, rel=1e-10)

    flat = dyadic_service.subtract_initial(dyadic_service.martingale_from_function(linear, 1.0, 4))
    assert dyadic_service.energy_check(flat) == (0.0, 0.0)


def test_sampler_respects_growth_and_is_reproducible():
    first = dyadic_service.sample_random_martingale(0.5, 1.0, 10, seed=7, stream=3)
    again = dyadic_service.sample_random_martingale(0.5, 1.0, 10, seed=7, stream=3)
    other = dyadic_service.sample_random_martingale(0.5, 1.0, 10, seed=7, stream=4)
    assert all(np.array_equal(a, b) for a, b in zip(first.levels, again.levels))
    assert not np.array_equal(first.levels[-1], other.levels[-1])
    assert first.levels[0][0] == 0.0
    assert dyadic_service.growth_holds(first)
    assert dyadic_service.martingale_residual(first) <= 1e-12


def test_sampler_preconditions():
    with pytest.raises(PreconditionError):
        dyadic_service.sample_random_martingale(1.0, 1.0, 4, seed=1)
    with pytest.raises(PreconditionError):
        dyadic_service.sample_random_martingale(0.5, 0.0, 4, seed=1)


def test_extremal_martingale_reaches_N():
    """Test Gamma_N = N on the leftmost cell with C = 1."""
    trace = dyadic_service.extremal_martingale(0.5, 12)
    gamma = dyadic_service.transforms(trace, 0.5)
    assert gamma.gamma[12][0] == pytest.approx(12.0, rel=1e-12)
    assert trace.levels[0][0] == 1.0
    assert trace.levels[1][1] == pytest.approx(2.0 - 2.0**0.5, rel=1e-15)
    assert gamma.t[1][0] == pytest.approx(1.0 - 2.0**-0.5, rel=1e-12)
    assert dyadic_service.martingale_residual(trace) <= 1e-12
    assert dyadic_service.growth_holds(trace)


def test_maximal_comparison_holds():
    trace = dyadic_service.sample_random_martingale(0.4, 2.0, 9, seed=11)
    gamma = dyadic_service.transforms(trace, 0.6)
    check = dyadic_service.maximal_comparison(trace, gamma)
    assert check.holds
    assert check.max_ratio <= 1.0 + 1e-12


def test_tail_check_rows():
    trace = dyadic_service.sample_random_martingale(0.5, 1.0, 10, seed=5)
    gamma = dyadic_service.transforms(trace, 0.5)
    rows = dyadic_service.t_tail_check(gamma, [0.1, 0.5, 1.0, 2.0])
    assert [row.t for row in rows] == [0.1, 0.5, 1.0, 2.0]
    assert all(row.holds for row in rows)
    assert all(0.0 <= row.exceedance <= 1.0 for row in rows)


def test_path_transforms():
    path = dyadic_service.sample_martingale_path(0.5, 1.0, 40, seed=3)
    gamma, t = dyadic_service.path_transforms(path, 0.5)
    weights = 2.0 ** (-0.5 * np.arange(41))
    assert path[0] == 0.0
    assert gamma[-1] == pytest.approx(float(np.sum(weights[1:] * path[1:])))
    assert t[-1] == pytest.approx(float(np.sum(weights[1:] * np.diff(path))))


def test_export_trace(output_dir: Storage):
    trace = dyadic_service.extremal_martingale(0.5, 3)
    path = dyadic_service.export_trace(trace, "traces/extremal.csv")
    lines = path.read_text().splitlines()
    assert path == output_dir.path("traces/extremal.csv")
    assert lines[0] == "level,cell_index,value"
    assert len(lines) == 1 + 15


def test_gamma_l2_is_the_cell_mean():
    trace = dyadic_service.extremal_martingale(0.5, 6)
    gamma = dyadic_service.transforms(trace, 0.5)
    star = gamma.gamma_star[6]
    assert dyadic_service.gamma_l2(gamma) == pytest.approx(float(np.mean(star**2)), rel=1e-12)
    assert dyadic_service.gamma_l2(gamma) >= 36.0 / 64
