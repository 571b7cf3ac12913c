"""
Directional Oscillation Service
Theta along a direction xi of R^d and its average over a direction rule:
the integral over [eps, 1] of (f(x + rho xi) - f(x - rho xi)) rho^(-1-alpha).
Ridge sums integrate with their kinks as breakpoints; any other vectorized
function is split at the dyadic scales only.
"""

import math
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray

from app.core.exceptions import PreconditionError
from app.core.logging import get_logger
from app.core.quadrature import integrator
from app.schemas.function import AnyField, CallableField, HolderField, HolderFunction
from app.schemas.oscillation import DirectionRule, OscillationProfile
from app.schemas.quadrature import QuadratureResult, QuadratureSpec
from app.services.funcspace import funcspace_service
from app.services.oscillation import _check_eps

logger = get_logger("oscillation")

UNIT_TOLERANCE = 1e-12

Ridge = tuple[HolderFunction, float, float]


class DirectionalService:
    """Service for the d-dimensional oscillation functional."""

    @staticmethod
    def _point(field: AnyField, x: ArrayLike) -> NDArray[np.float64]:
        point = np.asarray(x, dtype=float)
        if point.shape != (field.dim,):
            raise PreconditionError("point must have length dim", dim=field.dim)
        return point

    @staticmethod
    def _direction(field: AnyField, xi: ArrayLike) -> NDArray[np.float64]:
        direction = np.asarray(xi, dtype=float)
        if direction.shape != (field.dim,):
            raise PreconditionError("direction must have length dim", dim=field.dim)
        norm = math.hypot(*direction)
        if abs(norm - 1.0) > UNIT_TOLERANCE:
            raise PreconditionError("direction must be a unit vector", norm=norm)
        return direction

    def _ridges(
        self, field: HolderField, point: NDArray[np.float64], direction: NDArray[np.float64]
    ) -> list[Ridge]:
        """(g, <x, v>, <xi, v>) per component; components constant along xi drop out."""
        ridges = []
        for g, v in field.components:
            ridge = np.asarray(v, dtype=float)
            w = float(np.dot(direction, ridge))
            if w != 0.0:
                ridges.append((g, float(np.dot(point, ridge)), w))
        return ridges

    @staticmethod
    def _dyadic_breaks() -> list[float]:
        return [2.0**-k for k in range(1, 64)]

    @classmethod
    def _breaks(cls, ridges: list[Ridge]) -> list[float]:
        breaks = [abs(c - u) / abs(w) for g, u, w in ridges for c in funcspace_service.kinks(g)]
        return breaks + cls._dyadic_breaks()

    @staticmethod
    def _panel_width(ridges: list[Ridge]) -> Optional[float]:
        widths = []
        for g, _, w in ridges:
            period = funcspace_service.resolution(g)
            if period is not None:
                widths.append(0.5 * period / abs(w))
        return min(widths) if widths else None

    def _callable_band(
        self,
        field: CallableField,
        point: NDArray[np.float64],
        direction: NDArray[np.float64],
        a: float,
        b: float,
        quad: QuadratureSpec,
    ) -> QuadratureResult:
        power = -1.0 - field.alpha

        def func(rho: NDArray[np.float64]) -> NDArray[np.float64]:
            step = np.multiply.outer(rho, direction)
            diff = np.asarray(field.func(point + step)) - np.asarray(field.func(point - step))
            return diff.reshape(rho.shape) * rho**power

        return integrator.integrate(func, a, b, quad, breakpoints=self._dyadic_breaks())

    def band_directional(
        self,
        field: AnyField,
        x: ArrayLike,
        xi: ArrayLike,
        a: float,
        b: float,
        quad: QuadratureSpec,
    ) -> QuadratureResult:
        """Directional oscillation integral over [a, b]."""
        point, direction = self._point(field, x), self._direction(field, xi)
        if isinstance(field, CallableField):
            return self._callable_band(field, point, direction, a, b, quad)
        ridges = self._ridges(field, point, direction)
        if not ridges:
            return QuadratureResult(value=0.0, error_estimate=0.0, panels=0, evaluations=0)
        power = -1.0 - field.alpha

        def func(rho: NDArray[np.float64]) -> NDArray[np.float64]:
            total = np.zeros(rho.shape)
            for g, u, w in ridges:
                step = w * rho
                total += funcspace_service.evaluate(g, u + step) - funcspace_service.evaluate(
                    g, u - step
                )
            return total * rho**power

        return integrator.integrate(
            func,
            a,
            b,
            quad,
            breakpoints=self._breaks(ridges),
            panel_width=self._panel_width(ridges),
        )

    def theta_directional(
        self,
        field: AnyField,
        x: ArrayLike,
        xi: ArrayLike,
        eps: float,
        quad: Optional[QuadratureSpec] = None,
    ) -> float:
        """
        Theta_{eps, xi}(f)(x).

        Args:
            field: Ridge sum, or any vectorized function on points of shape (..., dim)
            x: Point of length dim
            xi: Unit direction, norm 1 to 1e-12
            eps: Lower limit, 0 < eps < 1/2
            quad: Quadrature policy

        Raises:
            PreconditionError: Non-unit direction or eps out of range
        """
        _check_eps(eps)
        quad = quad or QuadratureSpec.default()
        return self.band_directional(field, x, xi, eps, 1.0, quad).value

    def theta_dd(
        self,
        field: AnyField,
        x: ArrayLike,
        eps: float,
        rule: DirectionRule,
        quad: Optional[QuadratureSpec] = None,
    ) -> float:
        """Weighted sum of the directional thetas over ``rule``."""
        if rule.size == 0:
            raise PreconditionError("direction rule is empty")
        if rule.dim != field.dim:
            raise PreconditionError(
                "rule and field dimensions differ", rule=rule.dim, field=field.dim
            )
        quad = quad or QuadratureSpec.default()
        values = np.array(
            [self.theta_directional(field, x, xi, eps, quad) for xi in rule.direction_array]
        )
        return math.fsum(rule.weight_array * values)

    def theta_dd_profile(
        self,
        field: AnyField,
        x: ArrayLike,
        N: int,
        rule: DirectionRule,
        quad: Optional[QuadratureSpec] = None,
    ) -> OscillationProfile:
        """Directional average at eps = 2^-k for k = 1..N with its running max."""
        if N < 1:
            raise PreconditionError("profile needs N >= 1", N=N)
        if rule.dim != field.dim:
            raise PreconditionError(
                "rule and field dimensions differ", rule=rule.dim, field=field.dim
            )
        quad = quad or QuadratureSpec.default()
        cumulative = np.empty((rule.size, N))
        for i, xi in enumerate(rule.direction_array):
            bands = [
                self.band_directional(field, x, xi, 2.0**-k, 2.0 ** (1 - k), quad).value
                for k in range(1, N + 1)
            ]
            cumulative[i] = np.cumsum(bands)
        weights = rule.weight_array
        theta = [math.fsum(weights * cumulative[:, k]) for k in range(N)]
        star = np.maximum.accumulate(np.abs(theta)).tolist()
        return OscillationProfile(
            x=tuple(float(c) for c in np.asarray(x, dtype=float)),
            levels=list(range(1, N + 1)),
            theta=theta,
            theta_star=star,
        )

    def hemisphere_rule(self, dim: int, n: int) -> DirectionRule:
        """
        Product rule on the open upper hemisphere (last coordinate > 0), weights
        doubled so they sum to the area of the full sphere.

        d = 2: n midpoint angles in (0, pi). d = 3: n Gauss-Legendre heights in
        (0, 1) times 2n midpoint azimuths.
        """
        if n < 1:
            raise PreconditionError("rule needs n >= 1", n=n)
        if dim == 2:
            angles = math.pi * (np.arange(n) + 0.5) / n
            directions = np.column_stack((np.cos(angles), np.sin(angles)))
            weights = np.full(n, 2.0 * math.pi / n)
        elif dim == 3:
            nodes, node_weights = integrator.rule(n)
            z = 0.5 * (nodes + 1.0)
            wz = 0.5 * node_weights
            azimuths = 2.0 * math.pi * (np.arange(2 * n) + 0.5) / (2 * n)
            radius = np.sqrt(1.0 - z * z)
            directions = np.column_stack(
                (
                    np.outer(radius, np.cos(azimuths)).ravel(),
                    np.outer(radius, np.sin(azimuths)).ravel(),
                    np.repeat(z, 2 * n),
                )
            )
            weights = np.repeat(2.0 * wz * (2.0 * math.pi / (2 * n)), 2 * n)
        else:
            raise PreconditionError("direction rules exist for d = 2 and d = 3", dim=dim)
        return DirectionRule(
            dim=dim,
            directions=tuple(tuple(float(c) for c in row) for row in directions),
            weights=tuple(float(w) for w in weights),
        )

    def sphere_rule(self, dim: int, n: int) -> DirectionRule:
        """Hemisphere rule plus its antipodes, every weight halved."""
        half = self.hemisphere_rule(dim, n)
        antipodes = tuple(tuple(-c for c in xi) for xi in half.directions)
        weights = tuple(0.5 * w for w in half.weights)
        return DirectionRule(
            dim=dim,
            directions=half.directions + antipodes,
            weights=weights + weights,
            full_sphere=True,
        )


directional_service = DirectionalService()
