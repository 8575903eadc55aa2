"""Variance profiles of gradient estimators over a parameter sweep."""

from __future__ import annotations

import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Any, Literal

import numpy as np
from pydantic import BaseModel, Field

from pathgrad.core.exceptions import DomainError
from pathgrad.estimators.models import GradientEstimate, TestFunction
from pathgrad.estimators.pathwise import pathwise_gradient, score_function_gradient
from pathgrad.estimators.sources import GradientSource

logger = logging.getLogger(__name__)

TABLE_COLUMNS = (
    "sweep",
    "estimator",
    "mean",
    "total_variance",
    "standard_error",
    "n_samples",
    "seed",
)


class SweepSpec(BaseModel):
    """Parameter sweep ``min:max:points:scale``."""

    low: float
    high: float
    points: int = Field(ge=1)
    scale: Literal["linear", "log"] = "linear"

    @classmethod
    def parse(cls, text: str) -> SweepSpec:
        """Parse ``min:max:points[:linear|log]``.

        Raises:
            DomainError: For a malformed sweep string
        """
        parts = text.split(":")
        if len(parts) not in (3, 4):
            raise DomainError(f"Sweep must look like min:max:points[:scale], got {text!r}")
        try:
            low, high, points = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError as e:
            raise DomainError(f"Invalid sweep {text!r}", cause=e) from e
        scale = parts[3] if len(parts) == 4 else "linear"
        if scale not in ("linear", "log"):
            raise DomainError(f"Sweep scale must be linear or log, got {scale!r}")
        if scale == "log" and (low <= 0 or high <= 0):
            raise DomainError("Log sweeps need positive endpoints")
        if points < 1:
            raise DomainError("A sweep needs at least one point")
        return cls(low=low, high=high, points=points, scale=scale)  # type: ignore[arg-type]

    def values(self) -> list[float]:
        if self.points == 1:
            return [self.low]
        if self.scale == "log":
            return np.geomspace(self.low, self.high, self.points).tolist()
        return np.linspace(self.low, self.high, self.points).tolist()

    def __str__(self) -> str:
        return f"{self.low:g}:{self.high:g}:{self.points}:{self.scale}"


@dataclass(frozen=True)
class EstimatorSpec:
    """One estimator column of a variance profile.

    Attributes:
        label: Name written to the ``estimator`` column
        build: Sweep value ↦ gradient source
        method: "pathwise" or "score"
    """

    label: str
    build: Callable[[float], GradientSource]
    method: Literal["pathwise", "score"] = "pathwise"


@dataclass(frozen=True)
class VarianceRow:
    """One (sweep value, estimator) measurement."""

    sweep: float
    estimator: str
    estimate: GradientEstimate
    exact: np.ndarray | None = None
    extra: dict[str, Any] = field(default_factory=dict)

    @property
    def total_variance(self) -> float:
        return self.estimate.total_variance

    def to_record(self) -> dict[str, Any]:
        est = self.estimate
        record: dict[str, Any] = {
            "sweep": self.sweep,
            "estimator": self.estimator,
            "parameters": " ".join(est.parameters),
            "mean": " ".join(f"{v:.10g}" for v in est.mean),
            "total_variance": est.total_variance,
            "standard_error": " ".join(f"{v:.6g}" for v in est.standard_error),
            "n_samples": est.n_samples,
            "seed": est.seed,
        }
        if self.exact is not None:
            record["exact"] = " ".join(f"{v:.10g}" for v in np.atleast_1d(self.exact))
        record.update(self.extra)
        return record


@dataclass
class VarianceTable:
    """Rows of a variance profile, in sweep-then-estimator order."""

    rows: list[VarianceRow] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rows)

    def for_estimator(self, label: str) -> list[VarianceRow]:
        return [row for row in self.rows if row.estimator == label]

    def columns(self) -> list[str]:
        cols = list(TABLE_COLUMNS[:2]) + ["parameters"] + list(TABLE_COLUMNS[2:])
        for row in self.rows:
            for key in row.to_record():
                if key not in cols:
                    cols.append(key)
        return cols

    def records(self) -> list[dict[str, Any]]:
        return [row.to_record() for row in self.rows]

    def ratio(self, numerator: str, denominator: str) -> list[float]:
        """Per-sweep-point total-variance ratio of two estimators."""
        den = {row.sweep: row.total_variance for row in self.for_estimator(denominator)}
        return [row.total_variance / den[row.sweep] for row in self.for_estimator(numerator)]


def variance_profile(
    sweep: Sequence[float],
    estimators: Sequence[EstimatorSpec],
    test_function: TestFunction | Callable[[float], TestFunction],
    n_samples: int,
    seed: int,
    workers: int | None = None,
) -> VarianceTable:
    """Estimate mean gradient and total variance for every (sweep point, estimator).

    All estimators at a sweep point share the seed, so their samples come
    from the same base noise stream.

    Raises:
        DomainError: If the sweep or the estimator list is empty
    """
    if len(sweep) == 0:
        raise DomainError("Variance profile needs a nonempty sweep")
    if not estimators:
        raise DomainError("Variance profile needs at least one estimator")

    table = VarianceTable()
    for value in sweep:
        f = test_function(value) if not isinstance(test_function, TestFunction) else test_function
        for spec in estimators:
            source = spec.build(value)
            run = pathwise_gradient if spec.method == "pathwise" else score_function_gradient
            estimate = run(source, f, n_samples, seed, workers)
            exact = None if f.exact_gradient is None else np.asarray(f.exact_gradient(source), dtype=float)
            table.rows.append(VarianceRow(float(value), spec.label, estimate, exact))
            logger.debug("%s at %g: total variance %.4g", spec.label, value, estimate.total_variance)
    return table
