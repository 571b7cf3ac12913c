"""
Oscillation Schemas
"""

import math
from typing import Optional, Union

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, model_validator


class OscillationProfile(BaseModel):
    """Theta at the dyadic scales 2^-k, k in ``levels``, with its running maximum."""

    x: Union[float, tuple[float, ...]]
    levels: list[int]
    theta: list[float]
    theta_star: list[float]
    eps_bridge: float = Field(0.0, ge=0, description="2H slack for continuous eps")

    @model_validator(mode="after")
    def validate_running_max(self) -> "OscillationProfile":
        if not (len(self.levels) == len(self.theta) == len(self.theta_star)):
            raise ValueError("levels, theta and theta_star must have equal length")
        running = 0.0
        for value, star in zip(self.theta, self.theta_star):
            running = max(running, abs(value))
            if star != running:
                raise ValueError("theta_star must be the running max of |theta|")
        return self


class BridgedTheta(BaseModel):
    """Theta at a continuous eps next to its dyadic neighbour 2^-level."""

    eps: float
    level: int
    theta_eps: float
    theta_dyadic: float
    band: float

    @property
    def within_band(self) -> bool:
        return abs(self.theta_eps - self.theta_dyadic) <= self.band


class DirectionRule(BaseModel):
    """Quadrature rule on the unit sphere of R^dim (or one hemisphere of it)."""

    model_config = ConfigDict(frozen=True)

    dim: int = Field(..., ge=2)
    directions: tuple[tuple[float, ...], ...]
    weights: tuple[float, ...]
    full_sphere: bool = False

    @model_validator(mode="after")
    def validate_rule(self) -> "DirectionRule":
        if not self.directions:
            raise ValueError("direction rule is empty")
        if len(self.directions) != len(self.weights):
            raise ValueError("one weight per direction")
        if any(w <= 0 for w in self.weights):
            raise ValueError("weights must be positive")
        for xi in self.directions:
            if len(xi) != self.dim:
                raise ValueError("directions must have length dim")
            if abs(math.hypot(*xi) - 1.0) > 1e-12:
                raise ValueError("directions must be unit vectors")
        return self

    @property
    def direction_array(self) -> NDArray[np.float64]:
        return np.asarray(self.directions, dtype=float)

    @property
    def weight_array(self) -> NDArray[np.float64]:
        return np.asarray(self.weights, dtype=float)

    @property
    def size(self) -> int:
        return len(self.weights)


class CoefficientRow(BaseModel):
    j: int
    N: int
    alpha: float
    value: float
