"""Gradient sources: a distribution plus the per-sample terms of each estimator.

A source draws parameter-free base noise, maps it to samples, and turns a
batch of noise into per-sample gradient terms, shape (n, P):

    pathwise   v^θ(z)·∇f(z) (+ explicit ∂f/∂θ)
    score      f(z)·∇_θ log q_θ(z) (+ explicit ∂f/∂θ)

Reusing the same noise for a perturbed source gives common random numbers
for finite-difference checks.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from collections.abc import Sequence
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import special

from pathgrad.core.constants import TINY
from pathgrad.core.exceptions import DomainError
from pathgrad.estimators.models import TestFunction
from pathgrad.mvn.cholesky import CholeskyFactor
from pathgrad.mvn.velocity import (
    VelocityKind,
    check_antisymmetric,
    cholesky_score,
    mean_score,
    omt_contraction,
    rotation_contraction,
    rt_contraction,
)
from pathgrad.shape_grad.dirichlet import FactorSource, dirichlet_velocity_contraction
from pathgrad.univariate.base import ScalarDistribution
from pathgrad.univariate.student_t import StudentT

Array = NDArray[np.float64]

# Upper bound on floats held by one (n, D, D) contraction block
CONTRACTION_BUDGET = 4_000_000


class GradientSource(ABC):
    """Distribution adapter consumed by the Monte Carlo estimators."""

    label: str = "pathwise"

    @property
    @abstractmethod
    def parameters(self) -> tuple[str, ...]:
        """Labels of the estimated parameters."""

    @abstractmethod
    def theta(self) -> Array:
        """Current values of the estimated parameters."""

    @abstractmethod
    def is_positive(self, index: int) -> bool:
        """Whether estimated parameter ``index`` must stay positive."""

    @abstractmethod
    def noise(self, rng: np.random.Generator, n: int) -> Array:
        """Parameter-free base noise for ``n`` samples."""

    @abstractmethod
    def transform(self, noise: Array) -> Array:
        """Samples from base noise."""

    @abstractmethod
    def pathwise_terms(self, noise: Array, f: TestFunction) -> Array:
        """Per-sample pathwise gradient terms, shape (n, P)."""

    @abstractmethod
    def score_terms(self, noise: Array, f: TestFunction) -> Array:
        """Per-sample score-function terms, shape (n, P)."""

    @abstractmethod
    def perturbed(self, index: int, delta: float) -> GradientSource:
        """Copy with estimated parameter ``index`` shifted by ``delta``."""

    @property
    def max_chunk(self) -> int | None:
        """Largest batch the source wants per call (None for no limit)."""
        return None

    def _with_explicit(self, terms: Array, z: Array, f: TestFunction) -> Array:
        explicit = f.explicit_terms(z, self)
        return terms if explicit is None else terms + explicit


# =============================================================================
# Univariate
# =============================================================================


class UnivariateSource(GradientSource):
    """Any ScalarDistribution, with the master-formula pathwise derivative."""

    def __init__(self, dist: ScalarDistribution, indices: Sequence[int | str] | None = None):
        self.dist = dist
        if indices is None:
            self.indices = list(range(len(dist.param_names)))
        else:
            self.indices = [dist.param_index(i) for i in indices]
        if not self.indices:
            raise DomainError("UnivariateSource needs at least one parameter")

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.dist!r}, parameters={self.parameters})"

    @property
    def parameters(self) -> tuple[str, ...]:
        return tuple(self.dist.param_names[i] for i in self.indices)

    def theta(self) -> Array:
        values = self.dist.theta
        return np.array([float(values[i]) for i in self.indices])

    def is_positive(self, index: int) -> bool:
        return self.dist.is_positive(self.indices[index])

    def noise(self, rng: np.random.Generator, n: int) -> Array:
        return self.dist.base_noise(rng, n)

    def transform(self, noise: Array) -> Array:
        return np.asarray(self.dist.from_noise(noise), dtype=float)

    def pathwise_derivatives(self, noise: Array) -> tuple[Array, Array]:
        """(z, dz/dθ) with dz/dθ of shape (n, P)."""
        z = self.transform(noise)
        dz = np.stack([np.asarray(self.dist.dz_dtheta(z, i), dtype=float) for i in self.indices], axis=-1)
        return z, dz

    def pathwise_terms(self, noise: Array, f: TestFunction) -> Array:
        z, dz = self.pathwise_derivatives(noise)
        terms = np.asarray(f.gradient(z), dtype=float)[:, None] * dz
        return self._with_explicit(terms, z, f)

    def score_terms(self, noise: Array, f: TestFunction) -> Array:
        z = self.transform(noise)
        scores = np.stack([np.asarray(self.dist.score(z, i), dtype=float) for i in self.indices], axis=-1)
        terms = np.asarray(f.value(z), dtype=float)[:, None] * scores
        return self._with_explicit(terms, z, f)

    def perturbed(self, index: int, delta: float) -> UnivariateSource:
        i = self.indices[index]
        shifted = self.dist.with_param(i, float(self.dist.theta[i]) + delta)
        return type(self)(shifted, self.indices)


class StudentTSource(UnivariateSource):
    """Student's t through its Gamma-Normal composition."""

    dist: StudentT

    def __init__(self, dist: StudentT):
        super().__init__(dist, [0])

    def pathwise_derivatives(self, noise: Array) -> tuple[Array, Array]:
        z, dz = self.dist.compose(noise)
        return z, np.asarray(dz, dtype=float)[:, None]

    def perturbed(self, index: int, delta: float) -> StudentTSource:
        return StudentTSource(StudentT(nu=float(self.dist.nu) + delta))


# =============================================================================
# Dirichlet
# =============================================================================


class DirichletSource(GradientSource):
    """Dirichlet(α) sampled by normalized inverse-CDF Gamma draws."""

    def __init__(self, alpha: ArrayLike, factor: FactorSource = "approx"):
        arr = np.array(alpha, dtype=float)
        if arr.ndim != 1 or arr.shape[0] < 2:
            raise DomainError("Dirichlet needs a concentration vector with at least two entries")
        if np.any(np.isnan(arr)) or np.any(arr <= 0):
            raise DomainError("Dirichlet concentrations must be positive")
        arr.setflags(write=False)
        self.alpha = arr
        self.factor = factor

    def __repr__(self) -> str:
        return f"DirichletSource(n={self.alpha.shape[0]})"

    @property
    def parameters(self) -> tuple[str, ...]:
        return tuple(f"alpha_{j}" for j in range(self.alpha.shape[0]))

    def theta(self) -> Array:
        return self.alpha.copy()

    def is_positive(self, index: int) -> bool:
        return True

    def noise(self, rng: np.random.Generator, n: int) -> Array:
        return rng.uniform(size=(n, self.alpha.shape[0]))

    def transform(self, noise: Array) -> Array:
        gammas = np.maximum(special.gammaincinv(self.alpha, noise), TINY)
        return gammas / gammas.sum(axis=-1, keepdims=True)

    def score(self, z: Array) -> Array:
        """∂ log Dir(z|α)/∂α_j = log z_j − ψ(α_j) + ψ(α_tot)."""
        return np.log(z) - special.psi(self.alpha) + special.psi(self.alpha.sum())

    def pathwise_terms(self, noise: Array, f: TestFunction) -> Array:
        z = self.transform(noise)
        grad = np.asarray(f.gradient(z), dtype=float)
        terms = dirichlet_velocity_contraction(z, self.alpha, grad, self.factor)
        return self._with_explicit(terms, z, f)

    def score_terms(self, noise: Array, f: TestFunction) -> Array:
        z = self.transform(noise)
        terms = np.asarray(f.value(z), dtype=float)[:, None] * self.score(z)
        return self._with_explicit(terms, z, f)

    def perturbed(self, index: int, delta: float) -> DirichletSource:
        alpha = self.alpha.copy()
        alpha[index] += delta
        return DirichletSource(alpha, self.factor)


# =============================================================================
# Multivariate Normal
# =============================================================================


class MVNSource(GradientSource):
    """z = μ + L·z̃ with the velocity field chosen by ``kind``.

    Estimated parameters are the selected Cholesky entries (all lower
    entries by default), optionally preceded by every location μ_a.
    """

    def __init__(
        self,
        factor: CholeskyFactor,
        mean: ArrayLike | None = None,
        kind: VelocityKind | str = VelocityKind.OMT,
        entries: Sequence[tuple[int, int]] | Literal["lower", "strict"] = "lower",
        include_mean: bool = False,
        rotation: ArrayLike | None = None,
    ):
        self.factor = factor
        d = factor.dimension
        self.mean = np.zeros(d) if mean is None else np.asarray(mean, dtype=float)
        if self.mean.shape != (d,):
            raise DomainError(f"Mean must have shape ({d},), got {self.mean.shape}")
        self.kind = VelocityKind(kind)
        if self.kind is VelocityKind.OMT_WHITENED:
            raise DomainError("Whitened fields are evaluated through velocity_field, not MVNSource")
        if entries == "lower":
            self.entries = factor.lower_indices()
        elif entries == "strict":
            self.entries = [(a, b) for a, b in factor.lower_indices() if a > b]
        else:
            self.entries = [(int(a), int(b)) for a, b in entries]
            for a, b in self.entries:
                if not 0 <= b <= a < d:
                    raise DomainError(f"({a}, {b}) is not a lower-triangular index for D={d}")
        self.include_mean = include_mean
        self.rotation = None if rotation is None else check_antisymmetric(rotation)
        if self.kind is VelocityKind.RT_ROTATION and self.rotation is None:
            raise DomainError("RT+rotation source needs a rotation generator")
        self._rows = np.array([a for a, _ in self.entries], dtype=int)
        self._cols = np.array([b for _, b in self.entries], dtype=int)
        self.label = f"pathwise-{self.kind.value}"

    def __repr__(self) -> str:
        return f"MVNSource(D={self.factor.dimension}, kind={self.kind.value}, entries={len(self.entries)})"

    @property
    def dimension(self) -> int:
        return self.factor.dimension

    @property
    def parameters(self) -> tuple[str, ...]:
        names = [f"mu_{a}" for a in range(self.dimension)] if self.include_mean else []
        return tuple(names + [f"L_{a}_{b}" for a, b in self.entries])

    @property
    def n_mean(self) -> int:
        return self.dimension if self.include_mean else 0

    def theta(self) -> Array:
        values = self.factor.matrix[self._rows, self._cols]
        return np.concatenate([self.mean, values]) if self.include_mean else values.copy()

    def is_positive(self, index: int) -> bool:
        if index < self.n_mean:
            return False
        a, b = self.entries[index - self.n_mean]
        return a == b

    @property
    def max_chunk(self) -> int:
        return max(1, CONTRACTION_BUDGET // (self.dimension * self.dimension))

    def noise(self, rng: np.random.Generator, n: int) -> Array:
        return rng.standard_normal((n, self.dimension))

    def transform(self, noise: Array) -> Array:
        return self.mean + np.asarray(noise, dtype=float) @ self.factor.matrix.T

    def _select(self, full: Array, location: Array) -> Array:
        picked = full[:, self._rows, self._cols]
        return np.concatenate([location, picked], axis=-1) if self.include_mean else picked

    def contraction(self, z: Array, grad: Array) -> Array:
        """∇f·v^{ab} for every lower entry, shape (n, D, D)."""
        if self.kind is VelocityKind.RT:
            return rt_contraction(self.factor, z, grad, self.mean)
        if self.kind is VelocityKind.OMT:
            return omt_contraction(self.factor, z, grad, self.mean)
        assert self.rotation is not None
        return rotation_contraction(self.factor, z, grad, self.rotation, self.mean)

    def pathwise_terms(self, noise: Array, f: TestFunction) -> Array:
        z = self.transform(noise)
        grad = np.asarray(f.gradient(z), dtype=float)
        # location fields are the constant e_a for every kind
        terms = self._select(self.contraction(z, grad), grad)
        return self._with_explicit(terms, z, f)

    def score_terms(self, noise: Array, f: TestFunction) -> Array:
        z = self.transform(noise)
        scores = self._select(cholesky_score(self.factor, z, self.mean), mean_score(self.factor, z, self.mean))
        terms = np.asarray(f.value(z), dtype=float)[:, None] * scores
        return self._with_explicit(terms, z, f)

    def with_kind(self, kind: VelocityKind | str, rotation: ArrayLike | None = None) -> MVNSource:
        return MVNSource(
            self.factor, self.mean, kind, self.entries, self.include_mean,
            rotation if rotation is not None else self.rotation,
        )

    def perturbed(self, index: int, delta: float) -> MVNSource:
        if index < self.n_mean:
            mean = self.mean.copy()
            mean[index] += delta
            return MVNSource(self.factor, mean, self.kind, self.entries, self.include_mean, self.rotation)
        a, b = self.entries[index - self.n_mean]
        factor = self.factor.with_entry(a, b, float(self.factor.matrix[a, b]) + delta)
        return MVNSource(factor, self.mean, self.kind, self.entries, self.include_mean, self.rotation)
