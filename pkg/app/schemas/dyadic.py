"""
Dyadic Martingale Schemas
"""

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


class DyadicCell(BaseModel):
    """The half-open interval [j 2^-k rho, (j+1) 2^-k rho)."""

    model_config = ConfigDict(frozen=True)

    rho: float = Field(..., ge=1, le=2)
    k: int = Field(..., ge=0)
    j: int

    @property
    def width(self) -> float:
        return self.rho * 2.0**-self.k

    @property
    def lo(self) -> float:
        return self.j * self.width

    @property
    def hi(self) -> float:
        return (self.j + 1) * self.width

    def contains(self, x: float) -> bool:
        return self.lo <= x < self.hi

    def children(self) -> tuple["DyadicCell", "DyadicCell"]:
        return (
            DyadicCell(rho=self.rho, k=self.k + 1, j=2 * self.j),
            DyadicCell(rho=self.rho, k=self.k + 1, j=2 * self.j + 1),
        )


class MartingaleTrace(BaseModel):
    """
    Dyadic martingale S_0..S_N on [0, rho): ``levels[k]`` holds the 2^k cell
    values of S_k. ``scale`` is rho^beta for traces extracted from a function
    (so that Gamma carries the (2^-k rho)^-alpha weights) and 1 otherwise.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    rho: float = Field(..., ge=1, le=2)
    N: int = Field(..., ge=0)
    levels: list[np.ndarray]
    beta: float = Field(..., gt=0, lt=1)
    bound_C: float = Field(..., ge=0)
    scale: float = Field(1.0, gt=0)
    source: str = "synthetic"

    @model_validator(mode="after")
    def validate_levels(self) -> "MartingaleTrace":
        if len(self.levels) != self.N + 1:
            raise ValueError("one level array per k = 0..N")
        for k, level in enumerate(self.levels):
            if level.shape != (2**k,):
                raise ValueError(f"level {k} must hold 2^{k} cell values")
        return self

    @property
    def cell_measure(self) -> float:
        return self.rho * 2.0**-self.N


class GammaTrace(BaseModel):
    """Per-level transforms of a MartingaleTrace, level n arrays of length 2^n."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    rho: float
    beta: float
    scale: float
    gamma: list[np.ndarray]
    gamma_star: list[np.ndarray]
    t: list[np.ndarray]
    t_star: list[np.ndarray]
    qv: list[np.ndarray]

    @property
    def N(self) -> int:
        return len(self.gamma) - 1


class MaximalCheck(BaseModel):
    """Gamma*_n against (1 - 2^-beta)^-1 (T*_{n+1} + C + 2^-beta |S_0|)."""

    holds: bool
    max_excess: float
    max_ratio: float


class TailCheckRow(BaseModel):
    t: float
    exceedance: float
    bound: float
    holds: bool
