"""Validated settings and reports for the oracle and the rational fitter."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from pathgrad.config import Config, get_config


class OracleScheme(str, Enum):
    """How the oracle obtains ∂F/∂θ."""
    SERIES = "series"  # FD of the specfun CDF (vectorized)
    QUADRATURE = "quadrature"  # FD of a scipy.integrate.quad CDF
    DENSITY = "density"  # quad of pdf·score, no finite differences


class OracleConfig(BaseModel):
    """Numerical settings of the finite-difference oracle."""

    model_config = ConfigDict(frozen=True)

    quadrature_abs_tol: float = Field(
        default=1e-12,
        gt=0,
        description="Absolute tolerance handed to scipy.integrate.quad"
    )
    fd_base_step: float = Field(
        default=1e-4,
        gt=0,
        description="Base FD step, relative to max(|theta|, 1)"
    )
    richardson_levels: int = Field(
        default=4,
        ge=2,
        le=8,
        description="Depth of the Richardson tableau"
    )
    scheme: OracleScheme = Field(
        default=OracleScheme.SERIES,
        description="CDF-derivative scheme"
    )

    @classmethod
    def from_config(cls, config: Config | None = None, **overrides: Any) -> OracleConfig:
        """Build from the ``oracle`` section of a Config."""
        config = config or get_config()
        values = {
            "quadrature_abs_tol": config.get("oracle", "quadrature_abs_tol", default=1e-12),
            "fd_base_step": config.get("oracle", "fd_base_step", default=1e-4),
            "richardson_levels": config.get("oracle", "richardson_levels", default=4),
        }
        values.update(overrides)
        return cls(**values)


@dataclass(frozen=True)
class OracleResult:
    """Oracle value with its Richardson (or quadrature) error estimate."""

    value: Any
    error_estimate: Any


class FitSpec(BaseModel):
    """Description of one rational-surface fit.

    Coefficients are tensor-product monomials: coordinate ``k`` appears with
    powers ``0..degrees[k]``.
    """

    model_config = ConfigDict(frozen=True)

    distribution: Literal["gamma", "beta"]
    region_id: str = Field(default="rational", description="Region of the RegionedApprox")
    transforms: tuple[str, ...] = Field(..., min_length=1)
    numerator_degrees: tuple[int, ...]
    denominator_degrees: tuple[int, ...]
    prefactor: Literal["exp_ratio", "beta_digamma", "identity"]
    parameter_ranges: dict[str, tuple[float, float]] = Field(
        ...,
        description="Log-uniform sampling range per parameter"
    )
    quantile_range: tuple[float, float] = Field(
        default=(1e-3, 1.0 - 1e-3),
        description="Quantile band stratified over z"
    )
    n_samples: int = Field(..., ge=1)
    n_validation: int = Field(default=2000, ge=1)
    objective: Literal["least_squares", "minimax"] = "least_squares"
    minimax_iterations: int = Field(default=30, ge=0)
    max_refine_evaluations: int = Field(
        default=200,
        ge=1,
        description="Residual evaluations per nonlinear refinement"
    )
    target_rel_error: float = Field(..., gt=0)
    seed: int = 0

    @field_validator("numerator_degrees", "denominator_degrees")
    @classmethod
    def validate_degrees(cls, v: tuple[int, ...]) -> tuple[int, ...]:
        if any(d < 0 for d in v):
            raise ValueError("Polynomial degrees must be nonnegative")
        return v

    @field_validator("parameter_ranges")
    @classmethod
    def validate_ranges(cls, v: dict[str, tuple[float, float]]) -> dict[str, tuple[float, float]]:
        for name, (low, high) in v.items():
            if not 0 < low <= high:
                raise ValueError(f"Parameter range for {name} must satisfy 0 < low <= high")
        return v

    @model_validator(mode="after")
    def check_shapes(self) -> FitSpec:
        n_coords = len(self.transforms)
        if len(self.numerator_degrees) != n_coords or len(self.denominator_degrees) != n_coords:
            raise ValueError("Need one numerator and one denominator degree per coordinate")
        if self.n_samples < 10 * self.free_coefficients:
            raise ValueError(
                f"n_samples={self.n_samples} is below 10 x {self.free_coefficients} free coefficients"
            )
        low, high = self.quantile_range
        if not 0 < low < high < 1:
            raise ValueError("quantile_range must satisfy 0 < low < high < 1")
        return self

    @property
    def numerator_size(self) -> int:
        return math.prod(d + 1 for d in self.numerator_degrees)

    @property
    def denominator_size(self) -> int:
        return math.prod(d + 1 for d in self.denominator_degrees)

    @property
    def free_coefficients(self) -> int:
        """Numerator plus denominator coefficients, denominator constant fixed at 1."""
        return self.numerator_size + self.denominator_size - 1


class ValidationReport(BaseModel):
    """Held-out validation of a fitted surface."""

    max_rel_error: float = Field(..., ge=0)
    mean_rel_error: float = Field(..., ge=0)
    n_points: int = Field(..., ge=0)
    seed: int
    target_rel_error: float = Field(..., gt=0)
    denominator_sign_stable: bool = True

    @property
    def passed(self) -> bool:
        """Within target and denominator free of sign changes."""
        return self.denominator_sign_stable and self.max_rel_error <= self.target_rel_error

    @property
    def acceptable(self) -> bool:
        """Within the 2x target acceptance band."""
        return self.denominator_sign_stable and self.max_rel_error <= 2.0 * self.target_rel_error
