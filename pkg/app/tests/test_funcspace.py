"""
Unit tests for the function space service
"""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from app.core.exceptions import DomainError, PreconditionError
from app.schemas.function import FunctionKind, HolderField, HolderFunction, Interval
from app.services.funcspace import funcspace_service


def test_sign_power_values(sign_power: HolderFunction):
    """Test sign(x)|x|^alpha on both sides of the kink."""
    assert funcspace_service.eval(sign_power, 1.0) == 1.0
    assert funcspace_service.eval(sign_power, -0.25) == -0.5
    assert funcspace_service.eval(sign_power, 0.0) == 0.0


def test_constant_and_linear(constant: HolderFunction, linear: HolderFunction):
    """Test the trivial kinds."""
    values = funcspace_service.evaluate(constant, [0.1, 0.7, -3.0])
    assert np.all(values == 1.0)
    assert funcspace_service.eval(linear, 0.375) == 0.375


def test_translation_composes(sign_power: HolderFunction):
    """Test translate(translate(f, s), t) == translate(f, s + t)."""
    once = funcspace_service.translate(funcspace_service.translate(sign_power, 0.25), 0.5)
    direct = funcspace_service.translate(sign_power, 0.75)
    assert once.shift == direct.shift
    assert funcspace_service.eval(once, 0.75) == 0.0
    assert funcspace_service.eval(funcspace_service.translate(sign_power, 0.0), 1.0) == 1.0


def test_lacunary_on_dyadic_points(lacunary: HolderFunction):
    """Test that the reduced phase keeps dyadic arguments exact."""
    values = funcspace_service.evaluate(lacunary, [0.0, 0.5, 0.25, 1.0, 0.375])
    # only the first terms survive: sin(pi / 2) at 1/4, sin(3 pi / 4) - sin(pi / 4) at 3/8
    assert np.allclose(values, [0.0, 0.0, 1.0, 0.0, 0.0], atol=1e-12)


def test_weierstrass_at_zero(weierstrass: HolderFunction):
    """Test the cosine series at 0 against its geometric sum."""
    expected = math.fsum(4.0 ** (-0.5 * j) for j in range(weierstrass.terms + 1))
    assert funcspace_service.eval(weierstrass, 0.0) == pytest.approx(expected, rel=1e-14)


def test_truncation_tail_and_terms():
    """Test the closed-form tail and the smallest J meeting a tolerance."""
    tail = funcspace_service.truncation_tail(0.5, 2, 0)
    assert tail == pytest.approx(2**-0.5 / (1 - 2**-0.5))
    J = funcspace_service.truncation_terms(0.5, 64, 1e-12)
    assert 2 * funcspace_service.truncation_tail(0.5, 64, J) <= 1e-12
    assert 2 * funcspace_service.truncation_tail(0.5, 64, J - 1) > 1e-12
    with pytest.raises(PreconditionError):
        funcspace_service.truncation_terms(0.5, 2, 0.0)


def test_resolution_and_kinks(lacunary: HolderFunction, sign_power: HolderFunction):
    """Test the period of the top frequency and the kink list."""
    assert funcspace_service.resolution(lacunary) == 2.0**-10
    assert funcspace_service.resolution(sign_power) is None
    shifted = funcspace_service.translate(sign_power, 0.3)
    assert funcspace_service.kinks(shifted) == [0.3]
    assert funcspace_service.kinks(lacunary) == []


def test_seminorm_hints(sign_power: HolderFunction, constant: HolderFunction):
    """Test the known seminorms carried by the schema."""
    assert sign_power.seminorm_hint == pytest.approx(2**0.5)
    assert funcspace_service.effective_seminorm(sign_power) == pytest.approx(2**0.5)
    assert funcspace_service.effective_seminorm(constant) == 0.0


def test_holder_ratio_attained_on_symmetric_pairs(sign_power: HolderFunction):
    """Test that pairs symmetric about the kink reach 2^(1 - alpha)."""
    ratio = funcspace_service.holder_ratio_max(
        sign_power, Interval(lo=-1.0, hi=1.0), 256, 2.0**-30, seed=7
    )
    assert ratio == pytest.approx(2**0.5, rel=1e-12)


def test_holder_ratio_is_seeded(lacunary: HolderFunction):
    """Test reproducibility of the sampled ratio."""
    domain = Interval(lo=0.0, hi=1.0)
    first = funcspace_service.holder_ratio_max(lacunary, domain, 512, 1e-9, seed=3)
    second = funcspace_service.holder_ratio_max(lacunary, domain, 512, 1e-9, seed=3)
    assert first == second
    assert first > 0


def test_holder_ratio_rejects_degenerate_domain(linear: HolderFunction):
    """Test the gap precondition."""
    with pytest.raises(PreconditionError):
        funcspace_service.holder_ratio_max(linear, Interval(lo=0.0, hi=1e-12), 16, 1e-9, 1)


def test_effective_seminorm_adds_truncation_slack(lacunary: HolderFunction):
    """Test H = sampled ratio + twice the series tail."""
    ratio = funcspace_service.holder_ratio_max(
        lacunary, Interval(lo=-1.0, hi=2.0), 4096, 2.0**-40, seed=11
    )
    H = funcspace_service.effective_seminorm(lacunary, seed=11)
    assert H == pytest.approx(ratio + funcspace_service.truncation_slack(lacunary))


def test_sampled_function_domain():
    """Test interpolation inside and DomainError outside the samples."""
    f = HolderFunction(
        kind=FunctionKind.SAMPLED, alpha=0.5, samples_x=(0.0, 1.0), samples_y=(0.0, 2.0)
    )
    assert funcspace_service.eval(f, 0.25) == 0.5
    with pytest.raises(DomainError):
        funcspace_service.eval(f, 1.5)


def test_sampled_function_validation():
    """Test that abscissae must increase."""
    with pytest.raises(ValidationError):
        HolderFunction(
            kind=FunctionKind.SAMPLED, alpha=0.5, samples_x=(1.0, 0.0), samples_y=(0.0, 1.0)
        )


def test_eval_rejects_non_finite(linear: HolderFunction):
    with pytest.raises(PreconditionError):
        funcspace_service.eval(linear, math.inf)


def test_field_evaluation(sign_power: HolderFunction, linear: HolderFunction):
    """Test the ridge sum on R^2."""
    field = HolderField(
        dim=2,
        components=((sign_power, (1.0, 0.0)), (linear, (0.0, 1.0))),
    )
    values = funcspace_service.evaluate_field(field, [[0.25, 0.5], [-1.0, 2.0]])
    assert values.tolist() == [1.0, 1.0]
    with pytest.raises(PreconditionError):
        funcspace_service.evaluate_field(field, [[0.25, 0.5, 1.0]])


def test_field_rejects_mixed_exponents(sign_power: HolderFunction):
    other = HolderFunction(kind=FunctionKind.SIGN_POWER, alpha=0.3)
    with pytest.raises(ValidationError):
        HolderField(dim=1, components=((sign_power, (1.0,)), (other, (1.0,))))


@pytest.mark.parametrize(
    "kind, base", [(FunctionKind.LACUNARY_SINE, 2), (FunctionKind.WEIERSTRASS_COS, 4)]
)
def test_truncations_differ_by_at_most_the_tail(kind: FunctionKind, base: int):
    xs = np.random.default_rng(5).uniform(-1.0, 2.0, 200)
    short = HolderFunction(kind=kind, alpha=0.5, base=base, terms=6)
    long = short.model_copy(update={"terms": 20})
    gap = np.abs(funcspace_service.evaluate(long, xs) - funcspace_service.evaluate(short, xs))
    assert np.max(gap) <= funcspace_service.truncation_tail(0.5, base, 6) * (1 + 1e-12)
