"""Base interface for univariate distributions and the family registry."""

from __future__ import annotations

import dataclasses
from abc import ABC, abstractmethod
from collections.abc import Callable
from enum import Enum
from typing import Any, ClassVar

import numpy as np
from numpy.typing import ArrayLike, NDArray

from pathgrad.core.constants import DENSITY_FLOOR
from pathgrad.core.exceptions import DomainError, SingularDensityError, UnsupportedDistributionError

Array = NDArray[np.float64]


class DerivativeKind(str, Enum):
    """How a distribution obtains ∂F/∂θ."""
    ANALYTIC = "analytic"
    APPROX = "approx"
    ORACLE = "oracle"


def check_positive(name: str, value: ArrayLike) -> None:
    """Raise DomainError unless every element of ``value`` is positive."""
    arr = np.asarray(value, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr <= 0):
        raise DomainError(f"{name} must be positive")


class ScalarDistribution(ABC):
    """Base class for univariate distributions q_θ(z).

    Concrete families are frozen dataclasses whose fields are the entries
    of ``param_names``. Parameter values may be numpy arrays so the oracle
    can perturb θ for a whole batch of points at once.
    """

    param_names: ClassVar[tuple[str, ...]] = ()
    positive_params: ClassVar[tuple[bool, ...]] = ()

    # -- parameters ---------------------------------------------------------

    @property
    def theta(self) -> tuple[Any, ...]:
        """Current parameter vector, ordered as ``param_names``."""
        return tuple(getattr(self, name) for name in self.param_names)

    def param_index(self, which: int | str) -> int:
        """Resolve a parameter name or index.

        Raises:
            KeyError: For an unknown name
            IndexError: For an out-of-range index
        """
        if isinstance(which, str):
            if which not in self.param_names:
                raise KeyError(f"{type(self).__name__} has no parameter {which!r}")
            return self.param_names.index(which)
        if not 0 <= which < len(self.param_names):
            raise IndexError(f"Parameter index {which} out of range for {type(self).__name__}")
        return which

    def is_positive(self, index: int) -> bool:
        """Whether parameter ``index`` is constrained to be positive."""
        return self.positive_params[index] if self.positive_params else False

    def with_param(self, index: int, value: ArrayLike) -> ScalarDistribution:
        """Copy with parameter ``index`` replaced (scalar or array)."""
        name = self.param_names[self.param_index(index)]
        return dataclasses.replace(self, **{name: value})  # type: ignore[type-var]

    @property
    def derivative_kind(self) -> DerivativeKind:
        return DerivativeKind.ORACLE

    # -- density and distribution function ----------------------------------

    @property
    @abstractmethod
    def support(self) -> tuple[float, float]:
        """Closed support interval (may be infinite)."""

    @abstractmethod
    def pdf(self, z: ArrayLike) -> Any:
        """Density q_θ(z)."""

    def logpdf(self, z: ArrayLike) -> Any:
        with np.errstate(divide="ignore"):
            return np.log(self.pdf(z))

    @abstractmethod
    def cdf(self, z: ArrayLike) -> Any:
        """F_θ(z)."""

    def sf(self, z: ArrayLike) -> Any:
        """1 − F_θ(z)."""
        return 1.0 - np.asarray(self.cdf(z))

    @abstractmethod
    def ppf(self, u: ArrayLike) -> Any:
        """Quantile function F_θ⁻¹(u)."""

    # -- sampling -----------------------------------------------------------

    def base_noise(self, rng: np.random.Generator, size: int | tuple[int, ...]) -> Array:
        """Parameter-free noise that ``from_noise`` maps to samples."""
        return rng.uniform(size=size)

    def from_noise(self, noise: ArrayLike) -> Array:
        """Deterministic map from base noise to samples (inverse CDF by default)."""
        return np.asarray(self.ppf(noise), dtype=float)

    def sample(self, rng: np.random.Generator, size: int | tuple[int, ...]) -> Array:
        """Draw samples; the sampler is independent of the derivative scheme."""
        return self.from_noise(self.base_noise(rng, size))

    # -- derivatives --------------------------------------------------------

    def score(self, z: ArrayLike, index: int) -> Any:
        """∂ log q_θ(z)/∂θ_index.

        Raises:
            UnsupportedDistributionError: If the family has no analytic score
        """
        raise UnsupportedDistributionError(f"{type(self).__name__} has no analytic score")

    def dcdf_dtheta(self, z: ArrayLike, index: int) -> Any:
        """∂F_θ(z)/∂θ_index (oracle unless a family overrides it)."""
        from pathgrad.oracle.oracle import oracle_dcdf_dtheta

        return oracle_dcdf_dtheta(self, z, index)

    def dz_dtheta(self, z: ArrayLike, index: int) -> Any:
        """Pathwise derivative by the master formula −(∂F/∂θ)/q."""
        z_arr = np.asarray(z, dtype=float)
        density = np.asarray(self.pdf(z_arr), dtype=float)
        if np.any(density < DENSITY_FLOOR):
            raise SingularDensityError(f"Density below {DENSITY_FLOOR:g} in master formula")
        out = -np.asarray(self.dcdf_dtheta(z_arr, index), dtype=float) / density
        return out.item() if out.ndim == 0 else out

    def in_support(self, z: ArrayLike) -> NDArray[np.bool_]:
        low, high = self.support
        arr = np.asarray(z, dtype=float)
        return (arr >= low) & (arr <= high)


class DistributionRegistry:
    """Registry of named distribution factories (used by the CLI)."""

    _factories: ClassVar[dict[str, Callable[..., ScalarDistribution]]] = {}

    @classmethod
    def register(cls, name: str, factory: Callable[..., ScalarDistribution]) -> None:
        """Register a factory under ``name``."""
        cls._factories[name] = factory

    @classmethod
    def get(cls, name: str, **params: Any) -> ScalarDistribution:
        """Build a registered distribution.

        Raises:
            UnsupportedDistributionError: If ``name`` is not registered
        """
        factory = cls._factories.get(name)
        if factory is None:
            raise UnsupportedDistributionError(f"No distribution registered as: {name}")
        return factory(**params)

    @classmethod
    def list_names(cls) -> list[str]:
        """List all registered names."""
        return sorted(cls._factories)
