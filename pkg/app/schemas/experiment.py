"""
Experiment Schemas
"""

from enum import Enum
from typing import Any, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from app.schemas.function import HolderFunction
from config import settings
from config.experiments import experiment_defaults


class ExperimentKind(str, Enum):
    L2_GROWTH = "l2"
    TAIL = "tail"
    EXP_MOMENT = "exp-moment"
    LIL = "lil"
    CANCELLATION = "cancellation"
    IDENTITY_SWEEP = "identity"


class ExperimentConfig(BaseModel):
    """
    Seeded configuration of one experiment run.

    ``function`` is optional for the martingale experiments (exp-moment, lil),
    which fall back to the synthetic ensemble when it is missing.
    """

    experiment: ExperimentKind
    function: Optional[HolderFunction] = None
    alpha: float = Field(0.5, gt=0, lt=1)
    n_list: list[int] = []
    samples: int = Field(experiment_defaults["samples"], ge=1, description="M")
    seed: int = experiment_defaults["seed"]
    t_grid: list[float] = Field(default_factory=lambda: list(experiment_defaults["t_grid"]))
    lambda_grid: list[float] = Field(
        default_factory=lambda: list(experiment_defaults["lambda_grid"])
    )
    eps_levels: list[int] = Field(
        default_factory=lambda: list(experiment_defaults["eps_levels"])
    )
    ensemble: int = Field(experiment_defaults["ensemble"], ge=0)
    bound_C: float = Field(1.0, gt=0)
    x_points: list[float] = []
    sweep: str = "default"
    output_path: Optional[str] = None

    @model_validator(mode="before")
    @classmethod
    def default_levels(cls, data: Any) -> Any:
        """Levels default per experiment kind."""
        if isinstance(data, dict) and data.get("n_list") is None:
            try:
                kind = ExperimentKind(data.get("experiment")).value
            except ValueError:
                return data
            data = {**data, "n_list": list(experiment_defaults["n_list"][kind])}
        return data

    @field_validator("n_list")
    @classmethod
    def validate_n_list(cls, v: list[int]) -> list[int]:
        if not v:
            raise ValueError("n_list must not be empty")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("n_list must be strictly ascending")
        if v[0] < 1:
            raise ValueError("levels start at 1")
        return v

    @field_validator("eps_levels")
    @classmethod
    def validate_eps_levels(cls, v: list[int]) -> list[int]:
        if any(b <= a for a, b in zip(v, v[1:])) or (v and v[0] < 2):
            raise ValueError("eps_levels must be ascending integers >= 2")
        return v

    @model_validator(mode="after")
    def align_and_bound(self) -> "ExperimentConfig":
        if self.function is not None and self.function.alpha != self.alpha:
            self.alpha = self.function.alpha
        if (
            self.experiment is ExperimentKind.EXP_MOMENT
            and self.n_list[-1] > settings.DENSE_MAX_LEVEL
        ):
            raise ValueError(
                f"exp-moment levels must not exceed DENSE_MAX_LEVEL={settings.DENSE_MAX_LEVEL}"
            )
        return self

    @property
    def beta(self) -> float:
        return 1.0 - self.alpha

    def echo(self) -> dict[str, Any]:
        data = self.model_dump(mode="json", exclude={"function", "output_path"})
        data["function"] = self.function.descriptor() if self.function else None
        return data


class FittedConstant(BaseModel):
    """A fitted stand-in for an unspecified constant, with how it was fitted."""

    name: str
    value: Optional[float]
    method: str
    diagnostics: dict[str, Any] = {}


class ExperimentReport(BaseModel):
    experiment: ExperimentKind
    config: dict[str, Any]
    header: list[str]
    rows: list[list[Any]]
    constants: list[FittedConstant] = []
    flags: list[str] = []
    passed: Optional[bool] = None
    seed: int
    version: str
    wall_clock: Optional[float] = None
    extras: dict[str, Any] = {}

    def constant(self, name: str) -> Optional[float]:
        for c in self.constants:
            if c.name == name:
                return c.value
        return None

    def column(self, name: str) -> list[Any]:
        idx = self.header.index(name)
        return [row[idx] for row in self.rows]
