"""
Quadrature Schemas
"""

from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, field_validator

from config.quadrature import quadrature_config


class QuadratureScheme(str, Enum):
    COMPOSITE_ADAPTIVE = "composite-adaptive"
    PER_PERIOD = "per-period"


class QuadratureSpec(BaseModel):
    """Policy for one family of integrals."""

    model_config = ConfigDict(frozen=True)

    scheme: QuadratureScheme = QuadratureScheme.COMPOSITE_ADAPTIVE
    abs_tol: float = Field(..., gt=0)
    rel_tol: float = Field(..., gt=0)
    max_subdiv: int = Field(..., ge=1, description="Bisection rounds per panel")
    order: int = Field(8, ge=2, le=64, description="Gauss-Legendre nodes per half panel")
    breakpoints: tuple[float, ...] = ()

    @field_validator("breakpoints")
    @classmethod
    def validate_breakpoints(cls, v: tuple[float, ...]) -> tuple[float, ...]:
        if any(b > a for a, b in zip(v[1:], v[:-1])):
            raise ValueError("breakpoints must be sorted")
        return v

    @classmethod
    def default(cls) -> "QuadratureSpec":
        return cls(**quadrature_config)

    def tightened(self, factor: float) -> "QuadratureSpec":
        """Same policy with both tolerances scaled by ``factor``."""
        return self.model_copy(
            update={"abs_tol": self.abs_tol * factor, "rel_tol": self.rel_tol * factor}
        )


class QuadratureResult(BaseModel):
    value: float
    error_estimate: float
    panels: int
    evaluations: int
