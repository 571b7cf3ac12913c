"""
Dyadic Martingale Service
Difference martingales of a function on the grid D(rho), the transforms Gamma
and T with their summation-by-parts identity, quadratic variation, and a
seeded sampler of bounded dyadic martingales.
"""

import math
from collections.abc import Sequence
from pathlib import Path
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray

from app.core.exceptions import PreconditionError
from app.core.logging import get_logger
from app.core.parallel import task_rng
from app.core.storage import storage
from app.schemas.dyadic import (
    DyadicCell,
    GammaTrace,
    MartingaleTrace,
    MaximalCheck,
    TailCheckRow,
)
from app.schemas.function import HolderFunction
from app.services.funcspace import funcspace_service
from config import settings

logger = get_logger("dyadic")

# relative slack for bounds that hold exactly in real arithmetic
_ROUNDING = 1e-12


def cell_index(x: NDArray[np.float64], width: NDArray[np.float64]) -> NDArray[np.float64]:
    """floor(x / width) corrected so that j w <= x < (j + 1) w holds in floating point."""
    j = np.floor(x / width)
    j = np.where((j + 1.0) * width <= x, j + 1.0, j)
    return np.where(j * width > x, j - 1.0, j)


def _check_beta(beta: float) -> None:
    if not 0 < beta < 1:
        raise PreconditionError("beta must lie in (0, 1)", beta=beta)


def _check_dense(N: int) -> None:
    if not 0 <= N <= settings.DENSE_MAX_LEVEL:
        raise PreconditionError(
            "dense traces need 0 <= N <= DENSE_MAX_LEVEL",
            N=N,
            limit=settings.DENSE_MAX_LEVEL,
        )


class DyadicService:
    """Service for dyadic martingales and their transforms."""

    def cell_of(self, rho: float, k: int, x: float) -> DyadicCell:
        """The cell of generation k of D(rho) containing x; boundaries go right."""
        if k < 0:
            raise PreconditionError("cell generation must be >= 0", k=k)
        width = rho * 2.0**-k
        j = cell_index(np.asarray(x, dtype=float), np.asarray(width))
        return DyadicCell(rho=rho, k=k, j=int(j))

    def martingale_from_function(
        self,
        f: HolderFunction,
        rho: float,
        N: int,
        seminorm: Optional[float] = None,
    ) -> MartingaleTrace:
        """
        S_k = Delta f(I) / |I| on every cell I of generation k <= N of [0, rho).

        The finest level comes from the grid values of f; coarser levels are
        pairwise averages, so the child-average identity holds exactly.

        Args:
            f: Function, evaluable on [0, rho]
            rho: Grid dilation in [1, 2]
            N: Finest generation
            seminorm: H for the growth constant H rho^-beta (estimated when omitted)
        """
        _check_dense(N)
        if not 1 <= rho <= 2:
            raise PreconditionError("rho must lie in [1, 2]", rho=rho)
        width = rho * 2.0**-N
        grid = np.arange(2**N + 1, dtype=float) * width
        values = funcspace_service.evaluate(f, grid)
        levels = [np.diff(values) / width]
        for _ in range(N):
            finer = levels[-1]
            levels.append(0.5 * (finer[0::2] + finer[1::2]))
        levels.reverse()

        beta = 1.0 - f.alpha
        H = funcspace_service.effective_seminorm(f) if seminorm is None else seminorm
        logger.debug(
            "Martingale extracted",
            context={"kind": f.kind.value, "rho": rho, "N": N, "seminorm": H},
        )
        return MartingaleTrace(
            rho=rho,
            N=N,
            levels=levels,
            beta=beta,
            bound_C=H * rho**-beta,
            scale=rho**beta,
            source=f.kind.value,
        )

    def subtract_initial(self, trace: MartingaleTrace) -> MartingaleTrace:
        """S_k - S_0 on every level; the growth constant absorbs |S_0|."""
        s0 = float(trace.levels[0][0])
        return trace.model_copy(
            update={
                "levels": [level - s0 for level in trace.levels],
                "bound_C": trace.bound_C + abs(s0),
            }
        )

    def transforms(self, trace: MartingaleTrace, alpha: float) -> GammaTrace:
        """
        Gamma_n = scale * sum_{k=1..n} 2^(-k beta) S_k, T_n = sum 2^(-k beta)(S_k - S_{k-1})
        and <S>^2_n = sum (S_k - S_{k-1})^2, level n arrays of length 2^n.

        Raises:
            PreconditionError: alpha is not 1 - beta
        """
        beta = trace.beta
        if abs(alpha - (1.0 - beta)) > 1e-12:
            raise PreconditionError("transforms need alpha = 1 - beta", alpha=alpha, beta=beta)
        zero = np.zeros(1)
        gamma, gamma_star, t, t_star, qv = [zero], [zero], [zero], [zero], [zero]
        for n in range(1, trace.N + 1):
            weight = 2.0 ** (-n * beta)
            current = trace.levels[n]
            step = current - np.repeat(trace.levels[n - 1], 2)
            gamma.append(np.repeat(gamma[-1], 2) + trace.scale * weight * current)
            t.append(np.repeat(t[-1], 2) + weight * step)
            qv.append(np.repeat(qv[-1], 2) + step * step)
            gamma_star.append(np.maximum(np.repeat(gamma_star[-1], 2), np.abs(gamma[-1])))
            t_star.append(np.maximum(np.repeat(t_star[-1], 2), np.abs(t[-1])))
        return GammaTrace(
            rho=trace.rho,
            beta=beta,
            scale=trace.scale,
            gamma=gamma,
            gamma_star=gamma_star,
            t=t,
            t_star=t_star,
            qv=qv,
        )

    def martingale_residual(self, trace: MartingaleTrace) -> float:
        """Largest |mean of the two children - parent| over all cells."""
        worst = 0.0
        for k in range(trace.N):
            children = trace.levels[k + 1]
            average = 0.5 * (children[0::2] + children[1::2])
            worst = max(worst, float(np.max(np.abs(average - trace.levels[k]))))
        return worst

    def growth_ratio(self, trace: MartingaleTrace) -> float:
        """max_k ||S_k||_inf / (C 2^(k beta)); at most 1 when the growth bound holds."""
        if trace.bound_C == 0:
            peak = max(float(np.max(np.abs(level))) for level in trace.levels)
            return 0.0 if peak == 0 else math.inf
        return max(
            float(np.max(np.abs(level))) / (trace.bound_C * 2.0 ** (k * trace.beta))
            for k, level in enumerate(trace.levels)
        )

    def growth_holds(self, trace: MartingaleTrace) -> bool:
        return self.growth_ratio(trace) <= 1.0 + _ROUNDING

    def summation_by_parts_residual(self, trace: MartingaleTrace, gamma: GammaTrace) -> float:
        """
        max over n and cells of |T_n - (1 - 2^-beta) G_{n-1} - 2^(-n beta) S_n + 2^-beta S_0|
        with G = Gamma / scale.
        """
        beta = trace.beta
        damping = 1.0 - 2.0**-beta
        s0 = float(trace.levels[0][0])
        worst = 0.0
        for n in range(1, trace.N + 1):
            previous = np.repeat(gamma.gamma[n - 1] / trace.scale, 2)
            rhs = damping * previous + 2.0 ** (-n * beta) * trace.levels[n] - 2.0**-beta * s0
            worst = max(worst, float(np.max(np.abs(gamma.t[n] - rhs))))
        return worst

    def energy_check(self, trace: MartingaleTrace) -> tuple[float, float]:
        """
        (integral of S_N^2, integral of <S>^2_N) over [0, rho).

        Raises:
            PreconditionError: S_0 is not identically zero; use subtract_initial
        """
        s0 = float(trace.levels[0][0])
        if s0 != 0.0:
            raise PreconditionError("energy identity needs S_0 = 0", s0=s0)
        qv = np.zeros(1)
        for k in range(1, trace.N + 1):
            step = trace.levels[k] - np.repeat(trace.levels[k - 1], 2)
            qv = np.repeat(qv, 2) + step * step
        measure = trace.cell_measure
        final = trace.levels[trace.N]
        lhs = measure * math.fsum(final * final)
        rhs = measure * math.fsum(qv)
        return lhs, rhs

    def _increment_cap(
        self, beta: float, C: float, k: int, current: NDArray[np.float64]
    ) -> NDArray[np.float64]:
        ceiling = C * 2.0 ** ((k + 1) * beta)
        return np.maximum(
            0.0, np.minimum(ceiling - np.abs(current), ceiling * (1.0 - 2.0**-beta))
        )

    def sample_random_martingale(
        self,
        beta: float,
        C: float,
        N: int,
        seed: int,
        stream: int = 0,
        rho: float = 1.0,
    ) -> MartingaleTrace:
        """
        Random trace with S_0 = 0 whose children are S +- sigma d, d uniform on
        [0, min(C 2^((k+1) beta) - |S|, C 2^((k+1) beta)(1 - 2^-beta))] and sigma a
        Rademacher sign per pair. Reproducible from (seed, stream).
        """
        _check_beta(beta)
        _check_dense(N)
        if C <= 0:
            raise PreconditionError("growth constant C must be positive", C=C)
        rng = task_rng(seed, stream)
        levels = [np.zeros(1)]
        for k in range(N):
            current = levels[-1]
            cap = self._increment_cap(beta, C, k, current)
            d = rng.uniform(0.0, 1.0, current.size) * cap
            sign = 2.0 * rng.integers(0, 2, current.size) - 1.0
            levels.append(np.column_stack((current + sign * d, current - sign * d)).ravel())
        return MartingaleTrace(rho=rho, N=N, levels=levels, beta=beta, bound_C=C)

    def sample_martingale_path(
        self, beta: float, C: float, N: int, seed: int, stream: int = 0
    ) -> NDArray[np.float64]:
        """S_0..S_N along one x-path under the sampler's increment law; any N."""
        _check_beta(beta)
        if N < 0 or C <= 0:
            raise PreconditionError("path needs N >= 0 and C > 0", N=N, C=C)
        rng = task_rng(seed, stream)
        path = np.zeros(N + 1)
        for k in range(N):
            cap = float(self._increment_cap(beta, C, k, path[k : k + 1])[0])
            d = rng.uniform(0.0, 1.0) * cap
            path[k + 1] = path[k] + (d if rng.integers(0, 2) else -d)
        return path

    def path_transforms(
        self, path: NDArray[np.float64], beta: float
    ) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        """(Gamma_n, T_n) for n = 0..N along one path, unit scale."""
        weights = 2.0 ** (-beta * np.arange(path.size))
        weights[0] = 0.0
        gamma = np.cumsum(weights * path)
        t = np.concatenate(([0.0], np.cumsum(weights[1:] * np.diff(path))))
        return gamma, t

    def extremal_martingale(self, beta: float, N: int) -> MartingaleTrace:
        """
        S_k = 2^(k beta) on the leftmost cell of every generation, the sibling
        completing the child average, every other cell constant. Gamma_N = N on
        the leftmost cell with C = 1.

        The root is S_0 = 1 = 2^(0 beta), one unit above the zero-start
        construction. Gamma_n never weights S_0, so Gamma is unchanged. T_n and
        <S>^2_n see the first step as S_1 - 1 instead of S_1, and the siblings
        2 S_{k-1} - 2^(k beta) carry the offset.
        """
        _check_beta(beta)
        _check_dense(N)
        levels = [np.ones(1)]
        for k in range(1, N + 1):
            level = np.repeat(levels[-1], 2)
            level[0] = 2.0 ** (k * beta)
            level[1] = 2.0 * levels[-1][0] - level[0]
            levels.append(level)
        return MartingaleTrace(
            rho=1.0, N=N, levels=levels, beta=beta, bound_C=1.0, source="extremal"
        )

    def gamma_pointwise(
        self,
        f: HolderFunction,
        rho: ArrayLike,
        x: ArrayLike,
        n: int,
        s: ArrayLike = 0.0,
    ) -> NDArray[np.float64]:
        """
        Gamma_n^(rho)(f_s)(x) = sum_{k=1..n} Delta f_s(I_k(x)) / |I_k(x)|^alpha with
        f_s(y) = f(y - s), evaluated per point without dense levels. Broadcasts
        over rho, x and s.
        """
        if n < 0:
            raise PreconditionError("n must be >= 0", n=n)
        rho_, x_, s_ = np.broadcast_arrays(
            np.asarray(rho, dtype=float), np.asarray(x, dtype=float), np.asarray(s, dtype=float)
        )
        total = np.zeros(x_.shape)
        for k in range(1, n + 1):
            width = rho_ * 2.0**-k
            lo = cell_index(x_, width) * width
            hi = lo + width
            delta = funcspace_service.evaluate(f, hi - s_) - funcspace_service.evaluate(f, lo - s_)
            total += delta * width**-f.alpha
        return total

    def maximal_comparison(self, trace: MartingaleTrace, gamma: GammaTrace) -> MaximalCheck:
        """
        Gamma*_n / scale <= (T*_{n+1} + C + 2^-beta |S_0|) / (1 - 2^-beta) on every
        cell of generation n + 1, for n < N.
        """
        beta = trace.beta
        damping = 1.0 - 2.0**-beta
        offset = trace.bound_C + 2.0**-beta * abs(float(trace.levels[0][0]))
        excess, ratio = -math.inf, 0.0
        for n in range(trace.N):
            lhs = np.repeat(gamma.gamma_star[n] / trace.scale, 2)
            rhs = (gamma.t_star[n + 1] + offset) / damping
            excess = max(excess, float(np.max(lhs - rhs)))
            positive = rhs > 0
            if positive.any():
                ratio = max(ratio, float(np.max(lhs[positive] / rhs[positive])))
        if trace.N == 0:
            excess = 0.0
        return MaximalCheck(
            holds=excess <= _ROUNDING * (1.0 + offset), max_excess=excess, max_ratio=ratio
        )

    def t_quadratic_variation(self, gamma: GammaTrace) -> NDArray[np.float64]:
        """<T>^2_N per cell of the finest generation."""
        qv = np.zeros(1)
        for n in range(1, gamma.N + 1):
            step = gamma.t[n] - np.repeat(gamma.t[n - 1], 2)
            qv = np.repeat(qv, 2) + step * step
        return qv

    def t_tail_check(self, gamma: GammaTrace, t_grid: Sequence[float]) -> list[TailCheckRow]:
        """Fraction of cells with T*_N > t against 2 exp(-t^2 / (2 ||<T>^2_N||_inf))."""
        spread = float(np.max(self.t_quadratic_variation(gamma)))
        star = gamma.t_star[gamma.N]
        rows = []
        for t in t_grid:
            exceedance = float(np.mean(star > t))
            bound = 2.0 * math.exp(-t * t / (2.0 * spread)) if spread > 0 else float(t <= 0)
            rows.append(
                TailCheckRow(t=t, exceedance=exceedance, bound=bound, holds=exceedance <= bound)
            )
        return rows

    def gamma_l2(self, gamma: GammaTrace) -> float:
        """rho^-1 times the integral of (Gamma*_N)^2: the mean over equal cells."""
        star = gamma.gamma_star[gamma.N]
        return math.fsum(star * star) / star.size

    def trace_rows(self, trace: MartingaleTrace) -> list[tuple[int, int, float]]:
        return [
            (k, j, float(value))
            for k, level in enumerate(trace.levels)
            for j, value in enumerate(level)
        ]

    def export_trace(self, trace: MartingaleTrace, path: str | Path) -> Path:
        """CSV with one (level, cell_index, value) row per cell."""
        return storage().put_csv(path, ("level", "cell_index", "value"), self.trace_rows(trace))


dyadic_service = DyadicService()
