"""
Averaging Schemas
"""

from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


class AveragingDomain(BaseModel):
    """
    Parameter region {(rho, s): rho_lo <= rho <= rho_hi, 0 <= s <= rho} with
    the measure ds d(rho) / rho^2.
    """

    model_config = ConfigDict(frozen=True)

    rho_lo: float = Field(1.0, ge=1)
    rho_hi: float = Field(2.0, le=2)

    @model_validator(mode="after")
    def validate_range(self) -> "AveragingDomain":
        if self.rho_lo >= self.rho_hi:
            raise ValueError("rho_lo must be below rho_hi")
        return self


class DecompositionReport(BaseModel):
    x: float
    n: int
    alpha: float
    lhs: float
    main: float
    a_n: float
    residual: float
    bound: float = Field(..., description="Two-integral majorant of |a_n|")
    b_k: list[float] = []
    cross_checks: list[tuple[int, float, float]] = []

    @property
    def bound_holds(self) -> bool:
        return abs(self.a_n) <= self.bound * (1 + 1e-9) + 1e-14


class ErrorBoundRow(BaseModel):
    x: float
    n: int
    a_n: float
    ratio: float
    bound: float


class ErrorBoundSummary(BaseModel):
    seminorm: float
    max_ratio: float
    max_ratio_first_half: float
    fitted_c: Optional[float] = None
    bound_holds: bool
    rows: list[ErrorBoundRow] = []
