"""Value types for Monte Carlo gradient estimation."""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Any

import numpy as np
from numpy.typing import NDArray

if TYPE_CHECKING:
    from pathgrad.estimators.sources import GradientSource

Array = NDArray[np.float64]


class EstimatorKind(str, Enum):
    """Gradient estimator family."""
    PATHWISE = "pathwise"
    SCORE = "score"
    FINITE_DIFFERENCE = "fd"


@dataclass(frozen=True)
class GradientEstimate:
    """Monte Carlo gradient with per-component sample variance.

    Attributes:
        kind: Estimator family
        parameters: Parameter labels, one per component
        mean: Mean per-sample gradient
        variance: Per-component sample variance (ddof=1)
        n_samples: Number of samples N
        seed: Seed the run was derived from
        label: Free-form estimator label (e.g. "pathwise-omt")
    """

    kind: EstimatorKind
    parameters: tuple[str, ...]
    mean: Array = field(repr=False)
    variance: Array = field(repr=False)
    n_samples: int
    seed: int
    label: str = ""

    def __post_init__(self):
        if self.n_samples < 2:
            raise ValueError("A variance estimate needs at least 2 samples")
        mean = np.asarray(self.mean, dtype=float)
        var = np.maximum(np.asarray(self.variance, dtype=float), 0.0)
        mean.setflags(write=False)
        var.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "variance", var)

    @property
    def standard_error(self) -> Array:
        """sqrt(variance/N) per component."""
        return np.sqrt(self.variance / self.n_samples)

    @property
    def total_variance(self) -> float:
        """Trace of the per-sample covariance."""
        return float(np.sum(self.variance))

    def component(self, name: str) -> tuple[float, float]:
        """(mean, standard error) of one named component."""
        i = self.parameters.index(name)
        return float(self.mean[i]), float(self.standard_error[i])

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind.value,
            "label": self.label,
            "parameters": list(self.parameters),
            "mean": self.mean.tolist(),
            "variance": self.variance.tolist(),
            "standard_error": self.standard_error.tolist(),
            "total_variance": self.total_variance,
            "n_samples": self.n_samples,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class TestFunction:
    """Test function f(z) with its analytic gradient.

    ``value`` and ``gradient`` take a batch z of shape (N,) for univariate
    sources or (N, D) otherwise. ``parameter_gradient`` adds an explicit
    per-sample ∂f/∂θ term when f itself depends on θ; ``exact_gradient``
    returns the closed-form ∇_θ E[f] for a source when one is known.
    """

    __test__ = False

    name: str
    value: Callable[[Array], Array]
    gradient: Callable[[Array], Array]
    parameter_gradient: Callable[[Array, GradientSource], Array] | None = None
    exact_gradient: Callable[[GradientSource], Array] | None = None

    def explicit_terms(self, z: Array, source: GradientSource) -> Array | None:
        if self.parameter_gradient is None:
            return None
        return np.asarray(self.parameter_gradient(z, source), dtype=float)


@dataclass
class RunningMoments:
    """Streaming count, mean and M2 (Chan et al. merge) over per-sample gradients."""

    count: int = 0
    mean: Array | None = None
    m2: Array | None = None

    def update(self, batch: Array) -> None:
        """Fold a (n, P) block of per-sample terms in."""
        batch = np.asarray(batch, dtype=float)
        if batch.ndim == 1:
            batch = batch[:, None]
        n = batch.shape[0]
        if n == 0:
            return
        b_mean = batch.mean(axis=0)
        b_m2 = np.sum((batch - b_mean) ** 2, axis=0)
        self._combine(n, b_mean, b_m2)

    def merge(self, other: RunningMoments) -> None:
        if other.count and other.mean is not None and other.m2 is not None:
            self._combine(other.count, other.mean, other.m2)

    def _combine(self, n: int, mean: Array, m2: Array) -> None:
        if self.count == 0 or self.mean is None or self.m2 is None:
            self.count, self.mean, self.m2 = n, mean.copy(), m2.copy()
            return
        total = self.count + n
        delta = mean - self.mean
        self.mean = self.mean + delta * (n / total)
        self.m2 = self.m2 + m2 + delta * delta * (self.count * n / total)
        self.count = total

    @property
    def variance(self) -> Array:
        if self.count < 2 or self.m2 is None:
            raise ValueError("Variance needs at least 2 samples")
        return self.m2 / (self.count - 1)
