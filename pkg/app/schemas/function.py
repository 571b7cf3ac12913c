"""
Function Space Schemas
"""

import math
from collections.abc import Callable
from enum import Enum
from typing import Any, Optional, Union

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class FunctionKind(str, Enum):
    LACUNARY_SINE = "lacunary"
    WEIERSTRASS_COS = "weierstrass"
    SIGN_POWER = "sign-power"
    CONSTANT = "constant"
    LINEAR = "linear"
    SAMPLED = "sampled"

    @property
    def is_series(self) -> bool:
        return self in (FunctionKind.LACUNARY_SINE, FunctionKind.WEIERSTRASS_COS)


class HolderFunction(BaseModel):
    """
    A real function with Hölder exponent alpha.

    ``level`` is the constant value (Constant), the slope (Linear) and unused
    otherwise; Sampled functions carry their payload in ``samples_x`` /
    ``samples_y``. ``shift`` accumulates translations: the function evaluated
    is x -> f(x - shift).
    """

    model_config = ConfigDict(frozen=True)

    kind: FunctionKind
    alpha: float = Field(..., gt=0, lt=1, description="Hölder exponent")
    base: int = Field(2, ge=2, description="Series base")
    terms: int = Field(0, ge=0, description="Series truncation index J")
    level: float = 0.0
    shift: float = 0.0
    seminorm_hint: Optional[float] = Field(None, ge=0)
    samples_x: tuple[float, ...] = ()
    samples_y: tuple[float, ...] = ()

    @model_validator(mode="before")
    @classmethod
    def apply_kind_defaults(cls, data: Any) -> Any:
        """Lacunary series are dyadic; known seminorms are filled in."""
        if not isinstance(data, dict):
            return data
        data = dict(data)
        kind = FunctionKind(data.get("kind"))
        if kind is FunctionKind.LACUNARY_SINE:
            data["base"] = 2
        if data.get("seminorm_hint") is None and "alpha" in data:
            if kind is FunctionKind.SIGN_POWER:
                data["seminorm_hint"] = 2.0 ** (1.0 - float(data["alpha"]))
            elif kind is FunctionKind.CONSTANT:
                data["seminorm_hint"] = 0.0
        return data

    @model_validator(mode="after")
    def validate_samples(self) -> "HolderFunction":
        if self.kind is FunctionKind.SAMPLED:
            if len(self.samples_x) < 2 or len(self.samples_x) != len(self.samples_y):
                raise ValueError("sampled functions need matching x/y samples (>= 2)")
            if any(b <= a for a, b in zip(self.samples_x, self.samples_x[1:])):
                raise ValueError("sample abscissae must be strictly increasing")
        return self

    def descriptor(self) -> dict[str, Any]:
        """JSON descriptor consumed by the CLI and echoed in reports."""
        data: dict[str, Any] = {
            "kind": self.kind.value,
            "alpha": self.alpha,
            "base": self.base,
            "terms": self.terms,
            "level": self.level,
        }
        if self.shift:
            data["shift"] = self.shift
        return data


class Interval(BaseModel):
    """Half-open interval [lo, hi)."""

    model_config = ConfigDict(frozen=True)

    lo: float
    hi: float

    @model_validator(mode="after")
    def validate_order(self) -> "Interval":
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)) or self.lo >= self.hi:
            raise ValueError("interval needs finite lo < hi")
        return self

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, x: float) -> bool:
        return self.lo <= x < self.hi


class HolderField(BaseModel):
    """
    Ridge sum on R^d: x -> sum_i g_i(<x, v_i>), all g_i sharing one exponent.
    """

    model_config = ConfigDict(frozen=True)

    dim: int = Field(..., ge=1)
    components: tuple[tuple[HolderFunction, tuple[float, ...]], ...] = Field(
        ..., min_length=1
    )

    @field_validator("components")
    @classmethod
    def validate_components(
        cls, v: tuple[tuple[HolderFunction, tuple[float, ...]], ...]
    ) -> tuple[tuple[HolderFunction, tuple[float, ...]], ...]:
        alphas = {g.alpha for g, _ in v}
        if len(alphas) != 1:
            raise ValueError("all ridge components must share one exponent")
        return v

    @model_validator(mode="after")
    def validate_dimensions(self) -> "HolderField":
        for _, direction in self.components:
            if len(direction) != self.dim:
                raise ValueError("ridge directions must have length dim")
        return self

    @property
    def alpha(self) -> float:
        return self.components[0][0].alpha


class CallableField(BaseModel):
    """
    Vectorized function on R^d: ``func`` maps points of shape (..., dim) to
    values of shape (...). ``alpha`` is the Hölder exponent it is measured at.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    dim: int = Field(..., ge=1)
    alpha: float = Field(..., gt=0, lt=1)
    func: Callable[[NDArray[np.float64]], NDArray[np.float64]]


AnyField = Union[HolderField, CallableField]
