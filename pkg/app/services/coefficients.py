"""
Lacunary Coefficient Service
Sine moments of t^(-1-alpha), the coefficients c_{j,N} and b_j of the lacunary
sine series, their limit A(alpha), and the spectral form of theta.
"""

import math
from functools import lru_cache
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import special

from app.core.exceptions import PreconditionError
from app.core.logging import get_logger
from app.core.quadrature import integrator
from app.schemas.oscillation import CoefficientRow
from app.schemas.quadrature import QuadratureScheme, QuadratureSpec

logger = get_logger("oscillation")

TWO_PI = 2.0 * math.pi
# power series below, per-period panels up to the limit, asymptotics beyond
SERIES_CUTOFF = 0.5
PANEL_LIMIT = 64.0
_ASYMPTOTIC_TERMS = 40


def _moment_spec(quad: Optional[QuadratureSpec]) -> QuadratureSpec:
    base = quad or QuadratureSpec.default()
    return base.model_copy(
        update={"scheme": QuadratureScheme.PER_PERIOD, "order": max(base.order, 16)}
    )


def _series_primitive(u: float, alpha: float) -> float:
    """Integral of sin(2 pi t) t^(-1-alpha) over [0, u] by its power series."""
    if u == 0.0:
        return 0.0
    z = TWO_PI * u
    a_m = z  # (2 pi u)^(2m+1) / (2m+1)!
    total = 0.0
    for m in range(80):
        term = a_m / (2 * m + 1 - alpha)
        total += -term if m % 2 else term
        if abs(term) < 1e-18 * max(abs(total), 1.0):
            break
        a_m *= z * z / ((2 * m + 2) * (2 * m + 3))
    return total * u**-alpha


def _asymptotic_tail(u: float, alpha: float) -> float:
    """
    Integral of sin(2 pi t) t^(-1-alpha) over [u, inf) from the
    integration-by-parts expansion of the complex exponential integral.
    """
    s = 1.0 + alpha
    z = -1j / (TWO_PI * u)
    series = 0j
    term = 1 + 0j
    for m in range(_ASYMPTOTIC_TERMS):
        series += term
        term *= (s + m) * z
        if abs(term) < 1e-18:
            break
    phase = TWO_PI * math.fmod(u, 1.0)
    value = (1j / TWO_PI) * complex(math.cos(phase), math.sin(phase)) * u**-s * series
    return value.imag


def _integrand(alpha: float):
    def func(t: NDArray[np.float64]) -> NDArray[np.float64]:
        return np.sin(TWO_PI * np.mod(t, 1.0)) * t ** (-1.0 - alpha)

    return func


@lru_cache(maxsize=65536)
def _primitive(u: float, alpha: float, spec: QuadratureSpec) -> float:
    if u <= SERIES_CUTOFF:
        return _series_primitive(u, alpha)
    if u <= PANEL_LIMIT:
        body = integrator.integrate(_integrand(alpha), SERIES_CUTOFF, u, spec, panel_width=0.5)
        return _series_primitive(SERIES_CUTOFF, alpha) + body.value
    return _primitive_at_infinity(alpha, spec) - _asymptotic_tail(u, alpha)


@lru_cache(maxsize=256)
def _primitive_at_infinity(alpha: float, spec: QuadratureSpec) -> float:
    return _primitive(PANEL_LIMIT, alpha, spec) + _asymptotic_tail(PANEL_LIMIT, alpha)


class CoefficientService:
    """Service for the sine moments behind the lacunary spectral representation."""

    @staticmethod
    def _check_alpha(alpha: float) -> None:
        if not 0 < alpha < 1:
            raise PreconditionError("alpha must lie in (0, 1)", alpha=alpha)

    def sine_primitive(
        self, u: float, alpha: float, quad: Optional[QuadratureSpec] = None
    ) -> float:
        """Integral of sin(2 pi t) t^(-1-alpha) over [0, u]; u may be inf."""
        self._check_alpha(alpha)
        if u < 0:
            raise PreconditionError("sine moments start at 0", u=u)
        spec = _moment_spec(quad)
        if math.isinf(u):
            return _primitive_at_infinity(alpha, spec)
        return _primitive(float(u), alpha, spec)

    def sine_moment(
        self, a: float, b: float, alpha: float, quad: Optional[QuadratureSpec] = None
    ) -> float:
        """
        Integral of sin(2 pi t) t^(-1-alpha) over [a, b], 0 <= a <= b <= inf.

        Args:
            a, b: Limits
            alpha: Exponent in (0, 1)
            quad: Tolerances for the per-period panels

        Returns:
            The definite integral
        """
        self._check_alpha(alpha)
        if not 0 <= a <= b:
            raise PreconditionError("sine moment needs 0 <= a <= b", a=a, b=b)
        if a == b:
            return 0.0
        if a >= PANEL_LIMIT:
            upper = 0.0 if math.isinf(b) else _asymptotic_tail(b, alpha)
            return _asymptotic_tail(a, alpha) - upper
        return self.sine_primitive(b, alpha, quad) - self.sine_primitive(a, alpha, quad)

    def coeff_c(
        self, j: int, N: int, alpha: float, quad: Optional[QuadratureSpec] = None
    ) -> float:
        """c_{j,N}: the sine moment over [2^(j-N), 2^j]."""
        if j < 0 or N < 1:
            raise PreconditionError("coeff_c needs j >= 0 and N >= 1", j=j, N=N)
        return self.sine_moment(math.ldexp(1.0, j - N), math.ldexp(1.0, j), alpha, quad)

    def coeff_b(self, j: int, alpha: float, quad: Optional[QuadratureSpec] = None) -> float:
        """b_j: twice the sine moment over [0, 2^j]."""
        if j < 0:
            raise PreconditionError("coeff_b needs j >= 0", j=j)
        return 2.0 * self.sine_primitive(math.ldexp(1.0, j), alpha, quad)

    def limit_A(self, alpha: float, quad: Optional[QuadratureSpec] = None) -> float:
        """A(alpha) = lim b_j: b_6 plus the asymptotic tail beyond 2^6."""
        value = 2.0 * self.sine_primitive(math.inf, alpha, quad)
        if value <= 0:
            logger.error("A(alpha) not positive", context={"alpha": alpha, "value": value})
        return value

    def limit_A_closed_form(self, alpha: float) -> float:
        """2 (2 pi)^alpha Gamma(1 - alpha) sin(pi alpha / 2) / alpha."""
        self._check_alpha(alpha)
        return float(
            2.0 * TWO_PI**alpha * special.gamma(1.0 - alpha) * math.sin(math.pi * alpha / 2) / alpha
        )

    def coefficient_vector(
        self, alpha: float, N: int, J: int, quad: Optional[QuadratureSpec] = None
    ) -> NDArray[np.float64]:
        return np.array([self.coeff_c(j, N, alpha, quad) for j in range(J + 1)])

    def theta_lacunary_spectral(
        self,
        alpha: float,
        x: ArrayLike,
        N: int,
        J: int,
        quad: Optional[QuadratureSpec] = None,
    ) -> NDArray[np.float64]:
        """2 sum_{j<=J} c_{j,N} cos(2 pi 2^j x), vectorized over x."""
        if J < N:
            raise PreconditionError("spectral truncation needs J >= N", J=J, N=N)
        xs = np.asarray(x, dtype=float)
        coeffs = self.coefficient_vector(alpha, N, J, quad)
        total = np.zeros(xs.shape)
        for j, c in enumerate(coeffs):
            total += c * np.cos(TWO_PI * np.mod(np.ldexp(xs, j), 1.0))
        return 2.0 * total

    def weiss_partial_sum(
        self, alpha: float, xs: ArrayLike, N: int, quad: Optional[QuadratureSpec] = None
    ) -> NDArray[np.float64]:
        """sum_{j<=N} b_j cos(2 pi 2^j x)."""
        pts = np.asarray(xs, dtype=float)
        total = np.zeros(pts.shape)
        for j in range(N + 1):
            total += self.coeff_b(j, alpha, quad) * np.cos(TWO_PI * np.mod(np.ldexp(pts, j), 1.0))
        return total

    def decomposition_error(
        self,
        alpha: float,
        x: ArrayLike,
        N: int,
        J: int,
        quad: Optional[QuadratureSpec] = None,
    ) -> tuple[NDArray[np.float64], float]:
        """
        E_N(x) = spectral theta minus the Weiss partial sum, and its majorant
        2 sum_{j<=N} |moment over [0, 2^(j-N)]| + 2 sum_{N<j<=J} |c_{j,N}|.
        """
        error = self.theta_lacunary_spectral(alpha, x, N, J, quad) - self.weiss_partial_sum(
            alpha, x, N, quad
        )
        head = sum(
            abs(self.sine_primitive(math.ldexp(1.0, j - N), alpha, quad)) for j in range(N + 1)
        )
        tail = sum(abs(self.coeff_c(j, N, alpha, quad)) for j in range(N + 1, J + 1))
        return error, 2.0 * (head + tail)

    def c_tail_sum(
        self, alpha: float, N: int, extra: int = 40, quad: Optional[QuadratureSpec] = None
    ) -> float:
        """sum_{j=N}^{N+extra} |c_{j,N}|, bounded uniformly in N."""
        return math.fsum(abs(self.coeff_c(j, N, alpha, quad)) for j in range(N, N + extra + 1))

    def fit_decay_constant(
        self, alpha: float, N: int, extra: int = 20, quad: Optional[QuadratureSpec] = None
    ) -> float:
        """Smallest c with |c_{j,N}| <= c 2^(-(j-N)(1+alpha)) for N <= j <= N+extra."""
        return max(
            abs(self.coeff_c(j, N, alpha, quad)) * 2.0 ** ((j - N) * (1.0 + alpha))
            for j in range(N, N + extra + 1)
        )

    def coefficient_table(
        self, alpha: float, N: int, J: int, quad: Optional[QuadratureSpec] = None
    ) -> list[CoefficientRow]:
        return [
            CoefficientRow(j=j, N=N, alpha=alpha, value=self.coeff_c(j, N, alpha, quad))
            for j in range(J + 1)
        ]


coefficient_service = CoefficientService()
