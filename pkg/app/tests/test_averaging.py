"""
Unit tests for the averaging service
"""

import math

import pytest

from app.core.exceptions import PreconditionError
from app.schemas.averaging import AveragingDomain
from app.schemas.function import HolderFunction
from app.schemas.quadrature import QuadratureSpec
from app.services.averaging import averaging_service
from app.services.oscillation import oscillation_service


@pytest.mark.parametrize("x, rho, k", [(0.3, 1.0, 1), (0.05, 1.5, 3), (-0.4, 2.0, 2)])
def test_translation_average_identity(
    sign_power: HolderFunction, quad: QuadratureSpec, x: float, rho: float, k: int
):
    lhs, rhs = averaging_service.lemma31_check(sign_power, x, rho, k, quad)
    assert lhs == pytest.approx(rhs, rel=1e-8, abs=1e-10)


def test_lemma_preconditions(sign_power: HolderFunction):
    with pytest.raises(PreconditionError):
        averaging_service.lemma31_check(sign_power, 0.0, 0.5, 1)
    with pytest.raises(PreconditionError):
        averaging_service.lemma31_check(sign_power, 0.0, 1.0, 0)


def test_decomposition_residual(sign_power: HolderFunction, quad: QuadratureSpec):
    """Test sum B_k = Theta_{2^-n} / (1 + alpha) + a_n."""
    report = averaging_service.prop32_decompose(sign_power, 0.3, 6, 0.5, quad)
    assert report.residual <= 1e-6 * max(1.0, abs(report.lhs))
    assert report.main == pytest.approx(
        oscillation_service.theta(sign_power, 0.3, 2.0**-6, quad), rel=1e-9
    )
    assert report.bound_holds
    assert len(report.b_k) == 6


def test_linear_error_term_closed_form(linear: HolderFunction, quad: QuadratureSpec):
    """Test a_n = (2^(-n(1-alpha)) - 1) / (1 + alpha) for slope one."""
    report = averaging_service.prop32_decompose(linear, 0.2, 6, 0.5, quad)
    assert report.a_n == pytest.approx((2.0**-3 - 1.0) / 1.5, rel=1e-9)


def test_sign_power_error_term_vanishes_at_origin(sign_power: HolderFunction, quad: QuadratureSpec):
    reports = averaging_service.decomposition_levels(sign_power, 0.0, 5, quad)
    assert [r.n for r in reports] == [1, 2, 3, 4, 5]
    assert all(abs(r.a_n) <= 1e-9 for r in reports)


def test_alpha_must_match_function(sign_power: HolderFunction):
    with pytest.raises(PreconditionError):
        averaging_service.prop32_decompose(sign_power, 0.1, 3, 0.4)
    with pytest.raises(PreconditionError):
        averaging_service.prop32_decompose(sign_power, 0.1, 0, 0.5)


def test_direct_cross_check(linear: HolderFunction, quad: QuadratureSpec):
    """Test B_k from the (rho, s) tensor form against the one-dimensional form."""
    report = averaging_service.prop32_decompose(linear, 0.1, 3, 0.5, quad, cross_check=True)
    assert [k for k, _, _ in report.cross_checks] == [1, 2, 3]
    for _, reduced, direct in report.cross_checks:
        assert direct == pytest.approx(reduced, rel=1e-8)


def test_error_bound_summary(sign_power: HolderFunction, quad: QuadratureSpec):
    summary = averaging_service.error_bound_check(sign_power, [0.1, 0.45], 4, quad)
    assert summary.bound_holds
    assert len(summary.rows) == 8
    assert summary.seminorm == pytest.approx(2.0**0.5)
    assert summary.max_ratio >= summary.max_ratio_first_half
    assert summary.fitted_c is not None and summary.fitted_c <= 1.0 / 1.5 + 1e-9


def test_a_n_bound(sign_power: HolderFunction, quad: QuadratureSpec):
    report = averaging_service.prop32_decompose(sign_power, 0.45, 4, 0.5, quad)
    assert averaging_service.a_n_bound(sign_power, 0.45, 4, quad) == pytest.approx(report.bound)


def test_measure_of_domain():
    assert averaging_service.measure_of_domain() == pytest.approx(math.log(2.0), rel=1e-12)
    half = AveragingDomain(rho_lo=1.0, rho_hi=1.5)
    assert averaging_service.measure_of_domain(half) == pytest.approx(math.log(1.5), rel=1e-12)
