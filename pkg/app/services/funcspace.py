"""
Function Space Service
Evaluation, translation, truncation control and seminorm estimation for the
Hölder test functions.
"""

import math
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray

from app.core.exceptions import DomainError, PreconditionError
from app.core.logging import get_logger
from app.schemas.function import FunctionKind, HolderField, HolderFunction, Interval
from config import settings

logger = get_logger("funcspace")

# symmetric pairs about the domain midpoint added to every random sample
_SYMMETRIC_PAIRS = 64


class FuncSpaceService:
    """Service for evaluating and measuring Hölder functions."""

    def evaluate(self, f: HolderFunction, x: ArrayLike) -> NDArray[np.float64]:
        """
        Evaluate ``f`` on an array of points.

        Series are summed termwise in index order j = 0..J. The lacunary phase
        2^j y is reduced mod 1 before the sine, which keeps dyadic arguments
        exact.

        Args:
            f: Function to evaluate
            x: Points (any shape)

        Returns:
            Values with the shape of ``x``

        Raises:
            DomainError: Sampled function evaluated outside its samples
        """
        y = np.asarray(x, dtype=float)
        if f.shift:
            y = y - f.shift
        kind = f.kind

        if kind is FunctionKind.CONSTANT:
            return np.full(y.shape, f.level)
        if kind is FunctionKind.LINEAR:
            return f.level * y
        if kind is FunctionKind.SIGN_POWER:
            return np.sign(y) * np.abs(y) ** f.alpha
        if kind is FunctionKind.LACUNARY_SINE:
            total = np.zeros(y.shape)
            for j in range(f.terms + 1):
                phase = np.mod(np.ldexp(y, j), 1.0)
                total += 2.0 ** (-j * f.alpha) * np.sin(2.0 * np.pi * phase)
            return total
        if kind is FunctionKind.WEIERSTRASS_COS:
            total = np.zeros(y.shape)
            for j in range(f.terms + 1):
                freq = float(f.base) ** j
                total += freq ** (-f.alpha) * np.cos(freq * y)
            return total

        xs = np.asarray(f.samples_x)
        if y.size and (np.min(y) < xs[0] or np.max(y) > xs[-1]):
            raise DomainError(
                "point outside the sampled domain",
                lo=float(xs[0]) + f.shift,
                hi=float(xs[-1]) + f.shift,
            )
        return np.interp(y, xs, np.asarray(f.samples_y))

    def eval(self, f: HolderFunction, x: float) -> float:
        if not math.isfinite(x):
            raise PreconditionError("x must be finite", x=x)
        return float(self.evaluate(f, x))

    def translate(self, f: HolderFunction, s: float) -> HolderFunction:
        """g(x) = f(x - s); shifts accumulate so composition is exact."""
        return f.model_copy(update={"shift": f.shift + s})

    def holder_ratio_max(
        self,
        f: HolderFunction,
        domain: Interval,
        n_pairs: int,
        min_gap: float,
        seed: int,
    ) -> float:
        """
        Largest |f(x) - f(y)| / |x - y|^alpha over sampled pairs.

        Gaps are log-uniform in [min_gap, width]; pairs symmetric about the
        domain midpoint are always included. The result is a lower bound for
        the seminorm on ``domain``.
        """
        if n_pairs < 1:
            raise PreconditionError("n_pairs must be at least 1", n_pairs=n_pairs)
        if not 0 < min_gap < domain.width:
            raise PreconditionError(
                "degenerate domain for the requested gap",
                min_gap=min_gap,
                width=domain.width,
            )
        rng = np.random.default_rng(seed)
        gaps = np.exp(rng.uniform(math.log(min_gap), math.log(domain.width), n_pairs))
        left = domain.lo + rng.uniform(0.0, 1.0, n_pairs) * (domain.width - gaps)
        right = np.minimum(left + gaps, domain.hi)

        mid = 0.5 * (domain.lo + domain.hi)
        half = np.geomspace(min_gap, domain.width, _SYMMETRIC_PAIRS) / 2
        left = np.concatenate((left, mid - half))
        right = np.concatenate((right, mid + half))

        dist = right - left
        keep = dist > 0
        diff = np.abs(self.evaluate(f, right[keep]) - self.evaluate(f, left[keep]))
        ratio = float(np.max(diff / dist[keep] ** f.alpha, initial=0.0))
        logger.debug(
            "Hölder ratio sampled",
            context={"kind": f.kind.value, "pairs": int(keep.sum()), "ratio": ratio},
        )
        return ratio

    @staticmethod
    def truncation_tail(alpha: float, base: int, terms: int) -> float:
        """Sum over j > J of base^(-j alpha), in closed form."""
        return float(base) ** (-(terms + 1) * alpha) / (1.0 - float(base) ** (-alpha))

    def truncation_terms(self, alpha: float, base: int, tol: float) -> int:
        """Smallest J with twice the truncation tail at most ``tol``."""
        if tol <= 0:
            raise PreconditionError("tol must be positive", tol=tol)
        ratio = 1.0 - float(base) ** (-alpha)
        estimate = math.log(2.0 / (tol * ratio)) / (alpha * math.log(base)) - 1.0
        terms = max(0, int(math.floor(estimate)) - 2)
        while 2.0 * self.truncation_tail(alpha, base, terms) > tol:
            terms += 1
        return terms

    def truncation_slack(self, f: HolderFunction) -> float:
        """Uniform bound on the evaluation error of a truncated series."""
        if not f.kind.is_series:
            return 0.0
        return 2.0 * self.truncation_tail(f.alpha, f.base, f.terms)

    def resolution(self, f: HolderFunction) -> Optional[float]:
        """Period of the highest retained frequency, for series kinds."""
        if f.kind is FunctionKind.LACUNARY_SINE:
            return 2.0**-f.terms
        if f.kind is FunctionKind.WEIERSTRASS_COS:
            return 2.0 * math.pi * float(f.base) ** -f.terms
        return None

    def kinks(self, f: HolderFunction) -> list[float]:
        """Points where ``f`` is not smooth."""
        if f.kind is FunctionKind.SIGN_POWER:
            return [f.shift]
        if f.kind is FunctionKind.SAMPLED:
            return [x + f.shift for x in f.samples_x]
        return []

    def effective_seminorm(
        self,
        f: HolderFunction,
        domain: Optional[Interval] = None,
        seed: Optional[int] = None,
    ) -> float:
        """
        The H used by every normalization: the known seminorm when the
        function carries one, else the sampled ratio plus truncation slack.
        """
        if f.seminorm_hint is not None:
            return f.seminorm_hint
        domain = domain or Interval(lo=-1.0, hi=2.0)
        ratio = self.holder_ratio_max(
            f,
            domain,
            settings.HOLDER_PAIRS,
            settings.HOLDER_MIN_GAP,
            settings.DEFAULT_SEED if seed is None else seed,
        )
        return ratio + self.truncation_slack(f)

    def evaluate_field(self, field: HolderField, points: ArrayLike) -> NDArray[np.float64]:
        """Ridge sum at points of shape (..., dim)."""
        pts = np.asarray(points, dtype=float)
        if pts.shape[-1] != field.dim:
            raise PreconditionError("points must have trailing dimension dim", dim=field.dim)
        total = np.zeros(pts.shape[:-1])
        for g, direction in field.components:
            total += self.evaluate(g, pts @ np.asarray(direction, dtype=float))
        return total


funcspace_service = FuncSpaceService()
