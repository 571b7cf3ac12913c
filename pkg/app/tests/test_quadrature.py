"""
Unit tests for the panel integrator
"""

import math

import numpy as np
import pytest

from app.core.exceptions import PreconditionError, QuadratureError
from app.core.quadrature import integrator
from app.schemas.quadrature import QuadratureScheme, QuadratureSpec


def test_polynomial(quad: QuadratureSpec):
    """Test exactness on a smooth integrand."""
    result = integrator.integrate(lambda t: t * t, 0.0, 1.0, quad)
    assert result.value == pytest.approx(1.0 / 3.0, abs=1e-14)
    assert result.error_estimate <= quad.abs_tol
    assert result.panels >= 1


def test_breakpoint_at_kink(quad: QuadratureSpec):
    """Test that a forced breakpoint makes |t - c| piecewise polynomial."""
    result = integrator.integrate(lambda t: np.abs(t - 0.3), 0.0, 1.0, quad, breakpoints=[0.3])
    assert result.value == pytest.approx(0.29, abs=1e-14)


def test_empty_and_invalid_ranges(quad: QuadratureSpec):
    assert integrator.integrate(np.sin, 1.0, 1.0, quad).value == 0.0
    assert integrator.integrate(np.sin, 2.0, 1.0, quad).value == 0.0
    with pytest.raises(PreconditionError):
        integrator.integrate(np.sin, 0.0, math.inf, quad)


def test_singular_integrand_converges(quad: QuadratureSpec):
    """Test adaptive bisection toward an integrable endpoint singularity."""
    result = integrator.integrate(lambda t: t**-0.5, 2.0**-20, 1.0, quad)
    assert result.value == pytest.approx(2.0 - 2.0 * 2.0**-10, rel=1e-9)


def test_subdivision_limit_raises(quad: QuadratureSpec):
    """Test QuadratureError when max_subdiv rounds are not enough."""
    spec = quad.model_copy(update={"max_subdiv": 1})
    with pytest.raises(QuadratureError) as excinfo:
        integrator.integrate(lambda t: t**-0.9, 1e-12, 1.0, spec)
    assert excinfo.value.error_estimate > 0
    assert math.isfinite(excinfo.value.value)


def test_per_period_panels(quad: QuadratureSpec):
    """Test the per-period scheme on whole periods of a sine."""
    spec = quad.model_copy(update={"scheme": QuadratureScheme.PER_PERIOD, "order": 16})
    result = integrator.integrate(
        lambda t: np.sin(2 * np.pi * t), 0.0, 10.0, spec, panel_width=0.5
    )
    assert result.value == pytest.approx(0.0, abs=1e-12)
    assert result.panels == 20


def test_panel_edges_split_segments(quad: QuadratureSpec):
    edges = integrator.panel_edges(0.0, 1.0, quad, breakpoints=[0.5, 2.0], panel_width=0.25)
    assert edges.tolist() == [0.0, 0.25, 0.5, 0.75, 1.0]


def test_cumulative_integral(quad: QuadratureSpec):
    """Test the antiderivative built from accepted panels."""
    G = integrator.cumulative(np.cos, 0.0, math.pi, quad)
    t = np.array([0.1, 1.0, 2.5, math.pi])
    assert np.allclose(G(t), np.sin(t), atol=1e-12)
    assert G.total == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(PreconditionError):
        integrator.cumulative(np.cos, 1.0, 1.0, quad)


def test_sign_changes():
    """Test zeros of cos on [0, 5]."""
    roots = integrator.sign_changes(np.cos, np.linspace(0.0, 5.0, 6))
    assert np.allclose(np.sort(roots), [math.pi / 2, 3 * math.pi / 2], atol=1e-12)


def test_spec_validation():
    """Test that breakpoints must be sorted and tightening scales tolerances."""
    spec = QuadratureSpec.default()
    tight = spec.tightened(0.1)
    assert tight.abs_tol == pytest.approx(spec.abs_tol * 0.1)
    with pytest.raises(ValueError):
        QuadratureSpec(abs_tol=1e-8, rel_tol=1e-8, max_subdiv=4, breakpoints=(0.5, 0.1))


def test_interior_root_singularity_without_breakpoint(quad: QuadratureSpec):
    """Test convergence when bisection has to chase a kink it was not told about."""
    result = integrator.integrate(lambda t: np.sqrt(np.abs(t - 0.3)), 0.0, 1.0, quad)
    expected = 2.0 / 3.0 * (0.3**1.5 + 0.7**1.5)
    assert result.value == pytest.approx(expected, rel=1e-9)
    assert result.error_estimate <= quad.abs_tol
