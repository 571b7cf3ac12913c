"""
Oscillation Service
Theta_eps(f)(x): the integral over [eps, 1] of (f(x+h) - f(x-h)) h^(-1-alpha),
by panel quadrature or, for series, termwise through the sine moments.
"""

import math
from collections.abc import Callable
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray

from app.core.exceptions import PreconditionError
from app.core.logging import get_logger
from app.core.quadrature import integrator
from app.schemas.function import FunctionKind, HolderFunction
from app.schemas.oscillation import BridgedTheta, OscillationProfile
from app.schemas.quadrature import QuadratureResult, QuadratureSpec
from app.services.coefficients import TWO_PI, coefficient_service
from app.services.funcspace import funcspace_service

logger = get_logger("oscillation")

Integrand = Callable[[NDArray[np.float64]], NDArray[np.float64]]


def _check_eps(eps: float) -> None:
    if not 0 < eps < 0.5:
        raise PreconditionError("eps must lie in (0, 1/2)", eps=eps)


def dyadic_level(eps: float) -> int:
    """N with 2^(-N-1) <= eps < 2^-N."""
    _, exponent = math.frexp(eps)
    return -exponent


class OscillationService:
    """Service for the oscillation functional and its maximal variant."""

    def difference(self, f: HolderFunction, x: float) -> Integrand:
        """h -> f(x + h) - f(x - h)."""

        def func(h: NDArray[np.float64]) -> NDArray[np.float64]:
            return funcspace_service.evaluate(f, x + h) - funcspace_service.evaluate(f, x - h)

        return func

    def _kink_breaks(self, f: HolderFunction, x: float) -> list[float]:
        return [abs(c - x) for c in funcspace_service.kinks(f)]

    @staticmethod
    def panel_width(f: HolderFunction) -> Optional[float]:
        """Half a period of the top retained frequency, for series."""
        period = funcspace_service.resolution(f)
        return None if period is None else 0.5 * period

    def _weighted(self, f: HolderFunction, x: float, absolute: bool = False) -> Integrand:
        diff = self.difference(f, x)
        power = -1.0 - f.alpha

        def func(h: NDArray[np.float64]) -> NDArray[np.float64]:
            values = diff(h)
            return (np.abs(values) if absolute else values) * h**power

        return func

    def band_integral(
        self, f: HolderFunction, x: float, a: float, b: float, quad: QuadratureSpec
    ) -> QuadratureResult:
        """Signed oscillation integral over [a, b]."""
        breaks = self._kink_breaks(f, x)
        breaks += [2.0**-k for k in range(1, 64) if a < 2.0**-k < b]
        return integrator.integrate(
            self._weighted(f, x),
            a,
            b,
            quad,
            breakpoints=breaks,
            panel_width=self.panel_width(f),
        )

    def abs_band_integral(
        self, f: HolderFunction, x: float, a: float, b: float, quad: QuadratureSpec
    ) -> QuadratureResult:
        """Integral of |f(x+h) - f(x-h)| h^(-1-alpha) over [a, b], split at the kinks of |.|."""
        breaks = self._kink_breaks(f, x)
        width = self.panel_width(f)
        edges = integrator.panel_edges(a, b, quad, breaks, width)
        roots = integrator.sign_changes(self.difference(f, x), edges, samples=4, iterations=40)
        return integrator.integrate(
            self._weighted(f, x, absolute=True),
            a,
            b,
            quad,
            breakpoints=np.concatenate((np.asarray(breaks, dtype=float), roots)),
            panel_width=width,
        )

    def theta(
        self, f: HolderFunction, x: float, eps: float, quad: Optional[QuadratureSpec] = None
    ) -> float:
        """
        Theta_eps(f)(x) by quadrature.

        Args:
            f: Function
            x: Point
            eps: Lower limit, 0 < eps < 1/2
            quad: Quadrature policy (default from config)

        Returns:
            The oscillation integral

        Raises:
            PreconditionError: eps outside (0, 1/2)
            QuadratureError: tolerance not reached within max_subdiv
        """
        _check_eps(eps)
        quad = quad or QuadratureSpec.default()
        result = self.band_integral(f, x, eps, 1.0, quad)
        return result.value

    def theta_profile(
        self,
        f: HolderFunction,
        x: float,
        N: int,
        quad: Optional[QuadratureSpec] = None,
        seminorm: Optional[float] = None,
    ) -> OscillationProfile:
        """Theta_{2^-k} for k = 1..N, one band [2^-k, 2^(1-k)] per level."""
        if N < 1:
            raise PreconditionError("profile needs N >= 1", N=N)
        quad = quad or QuadratureSpec.default()
        theta: list[float] = []
        star: list[float] = []
        running, peak = 0.0, 0.0
        for k in range(1, N + 1):
            running += self.band_integral(f, x, 2.0**-k, 2.0 ** (1 - k), quad).value
            peak = max(peak, abs(running))
            theta.append(running)
            star.append(peak)
        H = funcspace_service.effective_seminorm(f) if seminorm is None else seminorm
        return OscillationProfile(
            x=x,
            levels=list(range(1, N + 1)),
            theta=theta,
            theta_star=star,
            eps_bridge=2.0 * H,
        )

    def theta_bridged(
        self,
        f: HolderFunction,
        x: float,
        eps: float,
        quad: Optional[QuadratureSpec] = None,
        seminorm: Optional[float] = None,
    ) -> BridgedTheta:
        """Theta at eps next to Theta at the dyadic scale just above it; spectral for series."""
        _check_eps(eps)
        quad = quad or QuadratureSpec.default()
        level = dyadic_level(eps)
        if f.kind.is_series:
            theta_eps = float(self.theta_series_spectral(f, x, eps, quad))
            dyadic = float(self.theta_series_spectral(f, x, 2.0**-level, quad))
        else:
            theta_eps = self.theta(f, x, eps, quad)
            dyadic = self.band_integral(f, x, 2.0**-level, 1.0, quad).value
        H = funcspace_service.effective_seminorm(f) if seminorm is None else seminorm
        return BridgedTheta(
            eps=eps,
            level=level,
            theta_eps=theta_eps,
            theta_dyadic=dyadic,
            band=2.0 * H,
        )

    def truncated_for_band(self, f: HolderFunction, k: int, band_rel_tol: float) -> HolderFunction:
        """
        ``f`` cut after the first series term whose tail is below
        band_rel_tol * 2^(-k alpha), the size of the difference on [2^-k, 2^(1-k)].
        """
        if not f.kind.is_series:
            return f
        needed = funcspace_service.truncation_terms(
            f.alpha, f.base, 2.0 * band_rel_tol * 2.0 ** (-k * f.alpha)
        )
        return f.model_copy(update={"terms": min(f.terms, needed)})

    def abs_theta(
        self,
        f: HolderFunction,
        x: float,
        eps: float,
        quad: Optional[QuadratureSpec] = None,
        band_rel_tol: Optional[float] = None,
    ) -> float:
        """
        Integral over [eps, 1] of |f(x+h) - f(x-h)| h^(-1-alpha); never below |theta|.
        With ``band_rel_tol`` series are truncated per dyadic band.
        """
        _check_eps(eps)
        quad = quad or QuadratureSpec.default()
        if band_rel_tol is None or not f.kind.is_series:
            return self.abs_band_integral(f, x, eps, 1.0, quad).value
        total = []
        for k in range(1, dyadic_level(eps) + 2):
            lo = max(eps, 2.0**-k)
            hi = 2.0 ** (1 - k)
            if lo < hi:
                g = self.truncated_for_band(f, k, band_rel_tol)
                total.append(self.abs_band_integral(g, x, lo, hi, quad).value)
        return math.fsum(total)

    def abs_theta_profile(
        self,
        f: HolderFunction,
        x: float,
        N: int,
        quad: Optional[QuadratureSpec] = None,
        band_rel_tol: Optional[float] = None,
    ) -> OscillationProfile:
        """
        Absolute oscillation at every level k = 1..N.

        With ``band_rel_tol`` a series is truncated per band, see truncated_for_band.
        """
        if N < 1:
            raise PreconditionError("profile needs N >= 1", N=N)
        quad = quad or QuadratureSpec.default()
        values: list[float] = []
        running = 0.0
        for k in range(1, N + 1):
            g = f if band_rel_tol is None else self.truncated_for_band(f, k, band_rel_tol)
            running += self.abs_band_integral(g, x, 2.0**-k, 2.0 ** (1 - k), quad).value
            values.append(running)
        return OscillationProfile(
            x=x, levels=list(range(1, N + 1)), theta=values, theta_star=list(values)
        )

    def _series_moments(
        self, f: HolderFunction, eps: float, quad: QuadratureSpec
    ) -> NDArray[np.float64]:
        """Per-term integral of the series integrand, scaled to unit amplitude."""
        moments = np.empty(f.terms + 1)
        for j in range(f.terms + 1):
            if f.kind is FunctionKind.LACUNARY_SINE:
                top = math.ldexp(1.0, j)
                moments[j] = 2.0 * coefficient_service.sine_moment(top * eps, top, f.alpha, quad)
            else:
                top = float(f.base) ** j / TWO_PI
                moments[j] = (
                    -2.0
                    * TWO_PI**-f.alpha
                    * coefficient_service.sine_moment(top * eps, top, f.alpha, quad)
                )
        return moments

    def _series_phases(self, f: HolderFunction, xs: NDArray[np.float64]) -> NDArray[np.float64]:
        """cos(2 pi 2^j y) rows for lacunary series, sin(b^j y) rows for Weierstrass."""
        y = xs - f.shift if f.shift else xs
        rows = np.empty((f.terms + 1, *y.shape))
        for j in range(f.terms + 1):
            if f.kind is FunctionKind.LACUNARY_SINE:
                rows[j] = np.cos(TWO_PI * np.mod(np.ldexp(y, j), 1.0))
            else:
                rows[j] = np.sin(float(f.base) ** j * y)
        return rows

    def theta_series_spectral(
        self,
        f: HolderFunction,
        x: ArrayLike,
        eps: float,
        quad: Optional[QuadratureSpec] = None,
    ) -> NDArray[np.float64]:
        """
        Termwise Theta_eps for a series, vectorized over x:
        lacunary 2 sum cos(2 pi 2^j y) * moment over [2^j eps, 2^j],
        Weierstrass -2 (2 pi)^-alpha sum sin(b^j y) * moment over [b^j eps, b^j] / 2 pi.
        """
        if not f.kind.is_series:
            raise PreconditionError("spectral theta needs a series", kind=f.kind.value)
        if not 0 < eps < 1:
            raise PreconditionError("eps must lie in (0, 1)", eps=eps)
        quad = quad or QuadratureSpec.default()
        xs = np.asarray(x, dtype=float)
        moments = self._series_moments(f, eps, quad)
        phases = self._series_phases(f, xs)
        return np.tensordot(moments, phases, axes=1)

    def spectral_profile(
        self,
        f: HolderFunction,
        xs: ArrayLike,
        N: int,
        quad: Optional[QuadratureSpec] = None,
    ) -> NDArray[np.float64]:
        """Theta_{2^-k}(x) for k = 1..N (rows) at every x (columns), series only."""
        if not f.kind.is_series:
            raise PreconditionError("spectral profile needs a series", kind=f.kind.value)
        quad = quad or QuadratureSpec.default()
        pts = np.asarray(xs, dtype=float).ravel()
        phases = self._series_phases(f, pts)
        moments = np.stack([self._series_moments(f, 2.0**-k, quad) for k in range(1, N + 1)])
        return moments @ phases

    def theta_fast(
        self,
        f: HolderFunction,
        xs: ArrayLike,
        eps: float,
        quad: Optional[QuadratureSpec] = None,
    ) -> NDArray[np.float64]:
        """Theta_eps at many points: spectral for series, quadrature otherwise."""
        _check_eps(eps)
        pts = np.asarray(xs, dtype=float)
        if f.kind.is_series:
            return self.theta_series_spectral(f, pts, eps, quad)
        if f.kind is FunctionKind.CONSTANT:
            return np.zeros(pts.shape)
        quad = quad or QuadratureSpec.default()
        flat = [self.band_integral(f, float(x), eps, 1.0, quad).value for x in pts.ravel()]
        return np.asarray(flat).reshape(pts.shape)

    def profile_matrix(
        self,
        f: HolderFunction,
        xs: ArrayLike,
        N: int,
        quad: Optional[QuadratureSpec] = None,
    ) -> NDArray[np.float64]:
        """(N, M) matrix of Theta_{2^-k}(x_i) for any kind."""
        pts = np.asarray(xs, dtype=float).ravel()
        if f.kind.is_series:
            return self.spectral_profile(f, pts, N, quad)
        if f.kind is FunctionKind.CONSTANT:
            return np.zeros((N, pts.size))
        columns = [
            self.theta_profile(f, float(x), N, quad, seminorm=0.0).theta for x in pts
        ]
        return np.asarray(columns).T.reshape(N, pts.size)


oscillation_service = OscillationService()
