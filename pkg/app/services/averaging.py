"""
Averaging Service
The translation-average identity for one dyadic generation and the
decomposition of the averaged Gamma transform into the oscillation integral
plus an explicit error term.

With D(t) = f(x + t) - f(x - t) and G(h) the integral of D over [0, h], the
average over (rho, s) of Gamma_n^(rho)(f_s)(x + s) equals sum_k B_k where
B_k is the integral of h^(-2-alpha) G(h) over [2^-k, 2^(1-k)]. Integrating by
parts gives Theta_{2^-n} / (1 + alpha) + a_n with
a_n = (2^(n(1+alpha)) G(2^-n) - G(1)) / (1 + alpha).
"""

import math
from collections.abc import Sequence
from typing import Optional

import numpy as np
from numpy.typing import NDArray

from app.core.exceptions import PreconditionError
from app.core.logging import get_logger
from app.core.quadrature import CumulativeIntegral, integrator
from app.schemas.averaging import (
    AveragingDomain,
    DecompositionReport,
    ErrorBoundRow,
    ErrorBoundSummary,
)
from app.schemas.function import HolderFunction
from app.schemas.quadrature import QuadratureSpec
from app.services.dyadic import cell_index
from app.services.funcspace import funcspace_service
from app.services.oscillation import oscillation_service

logger = get_logger("averaging")

# outer rho nodes of the direct tensor cross-check
_DIRECT_RHO_NODES = 16
# levels cross-checked against the direct tensor quadrature
CROSS_CHECK_LEVELS = 4


def _dyadic_breaks() -> list[float]:
    return [2.0**-k for k in range(1, 64)]


class AveragingService:
    """Service for the averaging identities behind the maximal oscillation bound."""

    def _check_rho(self, rho: float) -> None:
        if not 1 <= rho <= 2:
            raise PreconditionError("rho must lie in [1, 2]", rho=rho)

    def lemma_lhs(
        self, f: HolderFunction, x: float, rho: float, k: int, quad: QuadratureSpec
    ) -> float:
        """
        Integral over s in [0, rho] of Delta f_s(I_k(x + s)), split where the
        cell of x + s jumps and where a cell endpoint minus s meets a kink.
        """
        width = rho * 2.0**-k
        first = math.floor(x / width)
        last = math.ceil((x + rho) / width)
        edges = np.arange(first, last + 1, dtype=float) * width
        breaks = list(edges - x)
        for c in funcspace_service.kinks(f):
            breaks += list(edges - c)

        def func(s: NDArray[np.float64]) -> NDArray[np.float64]:
            lo = cell_index(x + s, np.asarray(width)) * width
            return funcspace_service.evaluate(f, lo + width - s) - funcspace_service.evaluate(
                f, lo - s
            )

        return integrator.integrate(
            func,
            0.0,
            rho,
            quad,
            breakpoints=breaks,
            panel_width=oscillation_service.panel_width(f),
        ).value

    def lemma_rhs(
        self, f: HolderFunction, x: float, rho: float, k: int, quad: QuadratureSpec
    ) -> float:
        """2^k times the integral of D over [0, 2^-k rho]."""
        width = rho * 2.0**-k
        breaks = [abs(c - x) for c in funcspace_service.kinks(f)]
        value = integrator.integrate(
            oscillation_service.difference(f, x),
            0.0,
            width,
            quad,
            breakpoints=breaks,
            panel_width=oscillation_service.panel_width(f),
        ).value
        return math.ldexp(value, k)

    def lemma31_check(
        self,
        f: HolderFunction,
        x: float,
        rho: float,
        k: int,
        quad: Optional[QuadratureSpec] = None,
    ) -> tuple[float, float]:
        """
        Both sides of the translation-average identity for generation k.

        Returns:
            (lhs, rhs): the s-average of Delta f_s over the cell of x + s, and
            2^k times the integral of D over [0, 2^-k rho]
        """
        if k < 1:
            raise PreconditionError("lemma needs k >= 1", k=k)
        self._check_rho(rho)
        quad = quad or QuadratureSpec.default()
        return self.lemma_lhs(f, x, rho, k, quad), self.lemma_rhs(f, x, rho, k, quad)

    def difference_cumulative(
        self, f: HolderFunction, x: float, quad: QuadratureSpec
    ) -> CumulativeIntegral:
        """G(h) = integral of D over [0, h], for h in [0, 1]."""
        breaks = [abs(c - x) for c in funcspace_service.kinks(f)] + _dyadic_breaks()
        return integrator.cumulative(
            oscillation_service.difference(f, x),
            0.0,
            1.0,
            quad,
            breakpoints=breaks,
            panel_width=oscillation_service.panel_width(f),
        )

    def abs_difference_cumulative(
        self, f: HolderFunction, x: float, quad: QuadratureSpec
    ) -> CumulativeIntegral:
        """h -> integral of |D| over [0, h], split at the zeros of D."""
        diff = oscillation_service.difference(f, x)
        breaks = [abs(c - x) for c in funcspace_service.kinks(f)] + _dyadic_breaks()
        width = oscillation_service.panel_width(f)
        edges = integrator.panel_edges(0.0, 1.0, quad, breaks, width)
        roots = integrator.sign_changes(diff, edges, samples=4, iterations=40)

        def func(t: NDArray[np.float64]) -> NDArray[np.float64]:
            return np.abs(diff(t))

        return integrator.cumulative(
            func, 0.0, 1.0, quad, breakpoints=breaks + roots.tolist(), panel_width=width
        )

    def band_weighted(
        self, G: CumulativeIntegral, alpha: float, k: int, quad: QuadratureSpec
    ) -> float:
        """B_k: integral of h^(-2-alpha) G(h) over [2^-k, 2^(1-k)]."""
        a, b = 2.0**-k, 2.0 ** (1 - k)
        power = -2.0 - alpha

        def func(h: NDArray[np.float64]) -> NDArray[np.float64]:
            return h**power * G(h)

        inner = G.lo[(G.lo > a) & (G.lo < b)]
        return integrator.integrate(func, a, b, quad, breakpoints=inner).value

    @staticmethod
    def a_n_from(G: CumulativeIntegral, alpha: float, n: int) -> float:
        """(2^(n(1+alpha)) G(2^-n) - G(1)) / (1 + alpha)."""
        head = float(G(2.0**-n))
        return (2.0 ** (n * (1.0 + alpha)) * head - G.total) / (1.0 + alpha)

    @staticmethod
    def bound_from(absG: CumulativeIntegral, alpha: float, n: int) -> tuple[float, float, float]:
        """(majorant, integral of |D| over [2^-n, 1], integral of |D| over [0, 2^-n])."""
        near = float(absG(2.0**-n))
        far = max(0.0, absG.total - near)
        return (far + 2.0 ** (n * (1.0 + alpha)) * near) / (1.0 + alpha), far, near

    def a_n_bound(
        self, f: HolderFunction, x: float, n: int, quad: Optional[QuadratureSpec] = None
    ) -> float:
        """
        Explicit majorant of |a_n|: (integral of |D| over [2^-n, 1]
        + 2^(n(1+alpha)) integral of |D| over [0, 2^-n]) / (1 + alpha).
        """
        if n < 1:
            raise PreconditionError("bound needs n >= 1", n=n)
        quad = quad or QuadratureSpec.default()
        return self.bound_from(self.abs_difference_cumulative(f, x, quad), f.alpha, n)[0]

    def decomposition_levels(
        self,
        f: HolderFunction,
        x: float,
        n_max: int,
        quad: Optional[QuadratureSpec] = None,
    ) -> list[DecompositionReport]:
        """Decompositions for n = 1..n_max sharing one G and one set of bands."""
        if n_max < 1:
            raise PreconditionError("decomposition needs n >= 1", n=n_max)
        quad = quad or QuadratureSpec.default()
        alpha = f.alpha
        G = self.difference_cumulative(f, x, quad)
        absG = self.abs_difference_cumulative(f, x, quad)
        b_k = [self.band_weighted(G, alpha, k, quad) for k in range(1, n_max + 1)]
        bands = [
            oscillation_service.band_integral(f, x, 2.0**-k, 2.0 ** (1 - k), quad).value
            for k in range(1, n_max + 1)
        ]
        reports = []
        for n in range(1, n_max + 1):
            lhs = math.fsum(b_k[:n])
            main = math.fsum(bands[:n])
            a_n = self.a_n_from(G, alpha, n)
            reports.append(
                DecompositionReport(
                    x=x,
                    n=n,
                    alpha=alpha,
                    lhs=lhs,
                    main=main,
                    a_n=a_n,
                    residual=abs(lhs - main / (1.0 + alpha) - a_n),
                    bound=self.bound_from(absG, alpha, n)[0],
                    b_k=b_k[:n],
                )
            )
        logger.debug(
            "Decomposition evaluated",
            context={
                "kind": f.kind.value,
                "x": x,
                "n_max": n_max,
                "residual": max(r.residual for r in reports),
            },
        )
        return reports

    def prop32_decompose(
        self,
        f: HolderFunction,
        x: float,
        n: int,
        alpha: float,
        quad: Optional[QuadratureSpec] = None,
        cross_check: bool = False,
    ) -> DecompositionReport:
        """
        Decompose the (rho, s)-average of Gamma_n into main term and error.

        Args:
            f: Function with exponent ``alpha``
            x: Point
            n: Depth, n >= 1
            alpha: Exponent of the weights; must be the function's own
            quad: Quadrature policy
            cross_check: Also integrate B_k directly in (rho, s) for k <= 4

        Returns:
            lhs = sum of B_k, main = Theta_{2^-n}, a_n and the identity residual
        """
        if n < 1:
            raise PreconditionError("decomposition needs n >= 1", n=n)
        if alpha != f.alpha:
            raise PreconditionError(
                "alpha must be the exponent of the function", alpha=alpha, function=f.alpha
            )
        quad = quad or QuadratureSpec.default()
        report = self.decomposition_levels(f, x, n, quad)[-1]
        if not cross_check:
            return report
        checks = [
            (k, report.b_k[k - 1], self.b_k_direct(f, x, k, quad))
            for k in range(1, min(n, CROSS_CHECK_LEVELS) + 1)
        ]
        return report.model_copy(update={"cross_checks": checks})

    def b_k_direct(
        self, f: HolderFunction, x: float, k: int, quad: Optional[QuadratureSpec] = None
    ) -> float:
        """
        B_k straight from its (rho, s) form: Gauss-Legendre in rho over [1, 2],
        the piecewise s-integral of Delta f_s inside. Low accuracy.
        """
        if k < 1:
            raise PreconditionError("b_k_direct needs k >= 1", k=k)
        quad = quad or QuadratureSpec.default()
        nodes, weights = integrator.rule(_DIRECT_RHO_NODES)
        rhos = 1.5 + 0.5 * nodes
        total = 0.0
        for rho, w in zip(rhos, weights):
            inner = self.lemma_lhs(f, x, float(rho), k, quad)
            total += 0.5 * w * (rho * 2.0**-k) ** -f.alpha * inner / rho**2
        return float(total)

    def error_bound_check(
        self,
        f: HolderFunction,
        x_samples: Sequence[float],
        n_max: int,
        quad: Optional[QuadratureSpec] = None,
        seminorm: Optional[float] = None,
    ) -> ErrorBoundSummary:
        """
        max |a_n(x)| / H over the samples and n <= n_max, the smallest c with
        |a_n| <= c (I_far + 2^(n(1+alpha)) I_near), and whether the 1/(1+alpha)
        majorant holds everywhere.
        """
        if n_max < 1:
            raise PreconditionError("n_max must be >= 1", n_max=n_max)
        quad = quad or QuadratureSpec.default()
        H = funcspace_service.effective_seminorm(f) if seminorm is None else seminorm
        alpha = f.alpha
        rows: list[ErrorBoundRow] = []
        fitted: Optional[float] = None
        holds = True
        for x in x_samples:
            G = self.difference_cumulative(f, float(x), quad)
            absG = self.abs_difference_cumulative(f, float(x), quad)
            for n in range(1, n_max + 1):
                a_n = self.a_n_from(G, alpha, n)
                bound, far, near = self.bound_from(absG, alpha, n)
                holds = holds and abs(a_n) <= bound * (1 + 1e-9) + 1e-14
                majorant = far + 2.0 ** (n * (1.0 + alpha)) * near
                if majorant > 0:
                    fitted = max(fitted or 0.0, abs(a_n) / majorant)
                if H > 0:
                    ratio = abs(a_n) / H
                else:
                    ratio = 0.0 if a_n == 0 else math.inf
                rows.append(ErrorBoundRow(x=float(x), n=n, a_n=a_n, ratio=ratio, bound=bound))

        half = max(1, n_max // 2)
        return ErrorBoundSummary(
            seminorm=H,
            max_ratio=max((r.ratio for r in rows), default=0.0),
            max_ratio_first_half=max((r.ratio for r in rows if r.n <= half), default=0.0),
            fitted_c=fitted,
            bound_holds=holds,
            rows=rows,
        )

    def measure_of_domain(self, domain: Optional[AveragingDomain] = None) -> float:
        """mu(A): integral of rho^-1 over [rho_lo, rho_hi], ln 2 for the full domain."""
        domain = domain or AveragingDomain()

        def func(rho: NDArray[np.float64]) -> NDArray[np.float64]:
            return 1.0 / rho

        return integrator.integrate(
            func, domain.rho_lo, domain.rho_hi, QuadratureSpec.default()
        ).value


averaging_service = AveragingService()
