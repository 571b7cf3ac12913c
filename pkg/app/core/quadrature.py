"""
Panel Quadrature
Vectorized composite Gauss-Legendre integration with forced breakpoints.

Every panel is integrated twice, once whole and once as two halves; the
difference is the Richardson error estimate. The composite-adaptive scheme
bisects panels whose estimate exceeds their share of the tolerance, the
per-period scheme keeps the caller's panels (one per period of the integrand)
and only certifies them.
"""

import math
from collections.abc import Callable, Iterable
from typing import Optional

import numpy as np
from numpy.typing import NDArray

from app.core.exceptions import PreconditionError, QuadratureError
from app.core.logging import get_logger
from app.schemas.quadrature import QuadratureResult, QuadratureScheme, QuadratureSpec

logger = get_logger("quadrature")

Integrand = Callable[[NDArray[np.float64]], NDArray[np.float64]]

# nodes evaluated per vectorized call
_CHUNK_NODES = 1 << 21
_NOISE = 100.0 * np.finfo(float).eps


class CumulativeIntegral:
    """t -> integral of the integrand from ``a`` to t, for t in [a, b]."""

    def __init__(
        self,
        func: Integrand,
        lo: NDArray[np.float64],
        hi: NDArray[np.float64],
        values: NDArray[np.float64],
        nodes: NDArray[np.float64],
        weights: NDArray[np.float64],
    ):
        order = np.argsort(lo, kind="stable")
        self._func = func
        self.lo = lo[order]
        self.hi = hi[order]
        self.values = values[order]
        self.prefix = np.concatenate(([0.0], np.cumsum(self.values)))
        self._nodes = nodes
        self._weights = weights

    @property
    def total(self) -> float:
        return float(math.fsum(self.values))

    def __call__(self, t: NDArray[np.float64] | float) -> NDArray[np.float64]:
        t = np.asarray(t, dtype=float)
        flat = t.ravel()
        idx = np.clip(np.searchsorted(self.lo, flat, side="right") - 1, 0, len(self.lo) - 1)
        start = self.lo[idx]
        half = 0.5 * (flat - start)
        pts = start[:, None] + half[:, None] * (1.0 + self._nodes[None, :])
        partial = half * (self._func(pts) @ self._weights)
        return (self.prefix[idx] + partial).reshape(t.shape)


class PanelIntegrator:
    """Composite Gauss-Legendre integrator driven by a QuadratureSpec."""

    def __init__(self) -> None:
        self._rules: dict[int, tuple[NDArray[np.float64], NDArray[np.float64]]] = {}

    def rule(self, order: int) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        if order not in self._rules:
            self._rules[order] = np.polynomial.legendre.leggauss(order)
        return self._rules[order]

    def panel_edges(
        self,
        a: float,
        b: float,
        spec: QuadratureSpec,
        breakpoints: Iterable[float] = (),
        panel_width: Optional[float] = None,
    ) -> NDArray[np.float64]:
        """Sorted panel edges: forced breakpoints, then optional period panels."""
        points = np.concatenate(
            (
                np.asarray(spec.breakpoints, dtype=float),
                np.asarray(list(breakpoints), dtype=float).ravel(),
            )
        )
        inner = points[(points > a) & (points < b)]
        edges = np.unique(np.concatenate(([a], inner, [b])))
        if panel_width is None or panel_width <= 0:
            return edges
        lo, width = edges[:-1], np.diff(edges)
        counts = np.maximum(1, np.ceil(width / panel_width - 1e-9)).astype(np.int64)
        seg = np.repeat(np.arange(lo.size), counts)
        local = np.arange(seg.size) - np.repeat(np.cumsum(counts) - counts, counts)
        split = lo[seg] + width[seg] * (local / counts[seg])
        return np.append(split, b)

    def _estimate(
        self, func: Integrand, lo: NDArray[np.float64], hi: NDArray[np.float64], order: int
    ) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.float64]]:
        """Per panel: whole-panel value, two-half value, two-half absolute mass."""
        x, w = self.rule(order)
        coarse = np.empty(lo.shape)
        fine = np.empty(lo.shape)
        mass = np.empty(lo.shape)
        step = max(1, _CHUNK_NODES // (3 * order))
        for start in range(0, lo.size, step):
            sl = slice(start, start + step)
            l, h = lo[sl], hi[sl]
            mid = 0.5 * (l + h)
            rad = 0.5 * (h - l)
            pts = np.concatenate(
                (
                    mid[:, None] + rad[:, None] * x[None, :],
                    0.5 * (l + mid)[:, None] + 0.5 * rad[:, None] * x[None, :],
                    0.5 * (mid + h)[:, None] + 0.5 * rad[:, None] * x[None, :],
                ),
                axis=1,
            )
            vals = np.asarray(func(pts), dtype=float)
            n = order
            coarse[sl] = rad * (vals[:, :n] @ w)
            left = vals[:, n : 2 * n] @ w
            right = vals[:, 2 * n :] @ w
            fine[sl] = 0.5 * rad * (left + right)
            mass[sl] = 0.5 * rad * (np.abs(vals[:, n : 2 * n]) @ w + np.abs(vals[:, 2 * n :]) @ w)
        return coarse, fine, mass

    def _run(
        self,
        func: Integrand,
        a: float,
        b: float,
        spec: QuadratureSpec,
        breakpoints: Iterable[float],
        panel_width: Optional[float],
    ) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.float64], float, int]:
        if not (math.isfinite(a) and math.isfinite(b)):
            raise PreconditionError("integration limits must be finite", a=a, b=b)
        if b <= a:
            empty = np.empty(0)
            return empty, empty, empty, 0.0, 0
        edges = self.panel_edges(a, b, spec, breakpoints, panel_width)
        lo, hi = edges[:-1], edges[1:]
        length = b - a
        acc_lo: list[NDArray[np.float64]] = []
        acc_hi: list[NDArray[np.float64]] = []
        acc_val: list[NDArray[np.float64]] = []
        acc_err = 0.0
        accepted_sum = 0.0
        evaluations = 0
        rounds = 0 if spec.scheme is QuadratureScheme.PER_PERIOD else spec.max_subdiv

        for depth in range(rounds + 1):
            coarse, fine, mass = self._estimate(func, lo, hi, spec.order)
            evaluations += lo.size * 3 * spec.order
            err = np.abs(fine - coarse)
            estimate = accepted_sum + math.fsum(fine)
            target = max(spec.abs_tol, spec.rel_tol * abs(estimate))
            ok = (err <= target * (hi - lo) / length) | (err <= _NOISE * mass)
            # panels too narrow for their share are settled by the global budget
            if acc_err + float(np.sum(err)) <= target:
                ok = np.ones_like(ok)

            if spec.scheme is QuadratureScheme.PER_PERIOD:
                total_err = float(np.sum(err))
                if total_err > target and not np.all(err <= _NOISE * mass):
                    raise QuadratureError(
                        "per-period panels did not certify the tolerance",
                        value=estimate,
                        error_estimate=total_err,
                        panels=int(lo.size),
                    )
                ok = np.ones_like(ok)

            acc_lo.append(lo[ok])
            acc_hi.append(hi[ok])
            acc_val.append(fine[ok])
            acc_err += float(np.sum(err[ok]))
            accepted_sum += math.fsum(fine[ok])

            if ok.all():
                break
            if depth == rounds:
                remaining = float(np.sum(err[~ok]))
                logger.warning(
                    "Quadrature hit the subdivision limit",
                    context={"a": a, "b": b, "rounds": rounds, "error": acc_err + remaining},
                )
                raise QuadratureError(
                    "quadrature did not converge within max_subdiv",
                    value=estimate,
                    error_estimate=acc_err + remaining,
                    a=a,
                    b=b,
                )
            bad_lo, bad_hi = lo[~ok], hi[~ok]
            mid = 0.5 * (bad_lo + bad_hi)
            lo = np.concatenate((bad_lo, mid))
            hi = np.concatenate((mid, bad_hi))

        return (
            np.concatenate(acc_lo),
            np.concatenate(acc_hi),
            np.concatenate(acc_val),
            acc_err,
            evaluations,
        )

    def integrate(
        self,
        func: Integrand,
        a: float,
        b: float,
        spec: QuadratureSpec,
        breakpoints: Iterable[float] = (),
        panel_width: Optional[float] = None,
    ) -> QuadratureResult:
        """
        Integrate ``func`` over [a, b].

        Args:
            func: Vectorized integrand, called on arrays of any shape
            a, b: Finite limits; b <= a integrates to zero
            spec: Quadrature policy
            breakpoints: Extra forced panel boundaries (ignored outside (a, b))
            panel_width: Split every segment into panels at most this wide

        Returns:
            Value with its error estimate and work counters
        """
        lo, _, values, err, evaluations = self._run(func, a, b, spec, breakpoints, panel_width)
        order = np.argsort(lo, kind="stable")
        return QuadratureResult(
            value=float(math.fsum(values[order])),
            error_estimate=err,
            panels=int(lo.size),
            evaluations=evaluations,
        )

    def cumulative(
        self,
        func: Integrand,
        a: float,
        b: float,
        spec: QuadratureSpec,
        breakpoints: Iterable[float] = (),
        panel_width: Optional[float] = None,
    ) -> CumulativeIntegral:
        """Antiderivative of ``func`` on [a, b] built from the accepted panels."""
        if b <= a:
            raise PreconditionError("cumulative integral needs a < b", a=a, b=b)
        lo, hi, values, _, _ = self._run(func, a, b, spec, breakpoints, panel_width)
        x, w = self.rule(2 * spec.order)
        return CumulativeIntegral(func, lo, hi, values, x, w)

    def sign_changes(
        self,
        func: Integrand,
        edges: NDArray[np.float64],
        samples: int = 8,
        iterations: int = 60,
    ) -> NDArray[np.float64]:
        """
        Zeros of ``func`` detected as sign changes on a grid refining ``edges``,
        polished by vectorized bisection. Used to place breakpoints at the
        kinks of |func|.
        """
        if edges.size < 2:
            return np.empty(0)
        frac = np.linspace(0.0, 1.0, samples + 1)[:-1]
        grid = (edges[:-1, None] + (edges[1:] - edges[:-1])[:, None] * frac[None, :]).ravel()
        grid = np.append(grid, edges[-1])
        vals = func(grid)
        flips = np.nonzero(np.signbit(vals[:-1]) != np.signbit(vals[1:]))[0]
        flips = flips[(vals[flips] != 0.0) & (vals[flips + 1] != 0.0)]
        left, right = grid[flips].copy(), grid[flips + 1].copy()
        if left.size == 0:
            return left
        left_sign = np.signbit(func(left))
        for _ in range(iterations):
            mid = 0.5 * (left + right)
            same = np.signbit(func(mid)) == left_sign
            left = np.where(same, mid, left)
            right = np.where(same, right, mid)
        return 0.5 * (left + right)


integrator = PanelIntegrator()
