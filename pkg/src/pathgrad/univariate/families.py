"""Concrete univariate families.

Normal and the truncated unit Normal have closed-form CDF derivatives.
Gamma and Beta get dz/dθ from shape_grad (``mode="approx"``) or from the
oracle (``mode="oracle"``).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, ClassVar, Literal

import numpy as np
from numpy.typing import ArrayLike
from scipy import special

from pathgrad.core.exceptions import DomainError
from pathgrad.core.specfun import (
    reg_inc_beta,
    reg_inc_beta_upper,
    reg_inc_gamma,
    reg_inc_gamma_upper,
    std_normal_cdf,
    std_normal_pdf,
)
from pathgrad.shape_grad.beta import beta_dz_dalpha, beta_dz_dbeta
from pathgrad.shape_grad.gamma import gamma_dz_dparams
from pathgrad.univariate.base import (
    Array,
    DerivativeKind,
    DistributionRegistry,
    ScalarDistribution,
    check_positive,
)
from pathgrad.univariate.master import truncated_normal_dz_dkappa

DerivativeMode = Literal["approx", "oracle"]


def _out(value: Any) -> Any:
    arr = np.asarray(value, dtype=float)
    return arr.item() if arr.ndim == 0 else arr


def _mode_kind(mode: str) -> DerivativeKind:
    if mode not in ("approx", "oracle"):
        raise ValueError(f"Unknown derivative mode: {mode}")
    return DerivativeKind(mode)


# =============================================================================
# Normal
# =============================================================================


@dataclass(frozen=True, eq=False)
class Normal(ScalarDistribution):
    """Normal(μ, σ)."""

    mu: Any = 0.0
    sigma: Any = 1.0

    param_names: ClassVar[tuple[str, ...]] = ("mu", "sigma")
    positive_params: ClassVar[tuple[bool, ...]] = (False, True)

    def __post_init__(self):
        check_positive("sigma", self.sigma)

    @property
    def derivative_kind(self) -> DerivativeKind:
        return DerivativeKind.ANALYTIC

    @property
    def support(self) -> tuple[float, float]:
        return (-np.inf, np.inf)

    def _std(self, z: ArrayLike) -> Array:
        return (np.asarray(z, dtype=float) - self.mu) / self.sigma

    def pdf(self, z: ArrayLike) -> Any:
        return _out(std_normal_pdf(self._std(z)) / self.sigma)

    def logpdf(self, z: ArrayLike) -> Any:
        x = self._std(z)
        return _out(-0.5 * x * x - np.log(self.sigma) - 0.5 * np.log(2.0 * np.pi))

    def cdf(self, z: ArrayLike) -> Any:
        return _out(std_normal_cdf(self._std(z)))

    def sf(self, z: ArrayLike) -> Any:
        return _out(std_normal_cdf(-self._std(z)))

    def ppf(self, u: ArrayLike) -> Any:
        return _out(self.mu + self.sigma * special.ndtri(np.asarray(u, dtype=float)))

    def base_noise(self, rng: np.random.Generator, size: int | tuple[int, ...]) -> Array:
        return rng.standard_normal(size)

    def from_noise(self, noise: ArrayLike) -> Array:
        return self.mu + self.sigma * np.asarray(noise, dtype=float)

    def score(self, z: ArrayLike, index: int) -> Any:
        x = self._std(z)
        if self.param_index(index) == 0:
            return _out(x / self.sigma)
        return _out((x * x - 1.0) / self.sigma)

    def dcdf_dtheta(self, z: ArrayLike, index: int) -> Any:
        x = self._std(z)
        density = std_normal_pdf(x) / self.sigma
        if self.param_index(index) == 0:
            return _out(-density)
        return _out(-density * x)

    def dz_dtheta(self, z: ArrayLike, index: int) -> Any:
        x = self._std(z)
        if self.param_index(index) == 0:
            return _out(np.ones_like(x))
        return _out(x)


# =============================================================================
# Truncated unit Normal
# =============================================================================


@dataclass(frozen=True, eq=False)
class TruncatedUnitNormal(ScalarDistribution):
    """Standard Normal truncated to [0, κ]."""

    kappa: Any = 1.0

    param_names: ClassVar[tuple[str, ...]] = ("kappa",)
    positive_params: ClassVar[tuple[bool, ...]] = (True,)

    def __post_init__(self):
        check_positive("kappa", self.kappa)

    @property
    def derivative_kind(self) -> DerivativeKind:
        return DerivativeKind.ANALYTIC

    @property
    def support(self) -> tuple[float, float]:
        return (0.0, float(np.max(self.kappa)))

    def _mass(self) -> Any:
        # Φ(κ) − ½
        return 0.5 * special.erf(np.asarray(self.kappa, dtype=float) / np.sqrt(2.0))

    def pdf(self, z: ArrayLike) -> Any:
        z_arr = np.asarray(z, dtype=float)
        inside = (z_arr >= 0) & (z_arr <= self.kappa)
        return _out(np.where(inside, std_normal_pdf(z_arr) / self._mass(), 0.0))

    def cdf(self, z: ArrayLike) -> Any:
        z_arr = np.asarray(z, dtype=float)
        ratio = 0.5 * special.erf(np.clip(z_arr, 0.0, None) / np.sqrt(2.0)) / self._mass()
        return _out(np.where(z_arr >= self.kappa, 1.0, ratio))

    def ppf(self, u: ArrayLike) -> Any:
        u_arr = np.asarray(u, dtype=float)
        if np.any((u_arr < 0) | (u_arr > 1)):
            raise DomainError("Quantile requires u in [0, 1]")
        return _out(np.sqrt(2.0) * special.erfinv(2.0 * u_arr * self._mass()))

    def score(self, z: ArrayLike, index: int) -> Any:
        self.param_index(index)
        z_arr = np.asarray(z, dtype=float)
        return _out(np.zeros_like(z_arr) - std_normal_pdf(self.kappa) / self._mass())

    def dcdf_dtheta(self, z: ArrayLike, index: int) -> Any:
        self.param_index(index)
        return _out(-np.asarray(self.cdf(z)) * std_normal_pdf(self.kappa) / self._mass())

    def dz_dtheta(self, z: ArrayLike, index: int) -> Any:
        self.param_index(index)
        return truncated_normal_dz_dkappa(z, self.kappa)


# =============================================================================
# Gamma
# =============================================================================


@dataclass(frozen=True, eq=False)
class Gamma(ScalarDistribution):
    """Gamma(α, β) with shape α and rate β."""

    alpha: Any = 1.0
    beta: Any = 1.0
    mode: DerivativeMode = "approx"

    param_names: ClassVar[tuple[str, ...]] = ("alpha", "beta")
    positive_params: ClassVar[tuple[bool, ...]] = (True, True)

    def __post_init__(self):
        check_positive("alpha", self.alpha)
        check_positive("beta", self.beta)
        _mode_kind(self.mode)

    @property
    def derivative_kind(self) -> DerivativeKind:
        return _mode_kind(self.mode)

    @property
    def support(self) -> tuple[float, float]:
        return (0.0, np.inf)

    def logpdf(self, z: ArrayLike) -> Any:
        z_arr = np.asarray(z, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            value = (
                self.alpha * np.log(self.beta)
                + (self.alpha - 1.0) * np.log(z_arr)
                - self.beta * z_arr
                - special.gammaln(self.alpha)
            )
        return _out(np.where(z_arr > 0, value, -np.inf))

    def pdf(self, z: ArrayLike) -> Any:
        return _out(np.exp(self.logpdf(z)))

    def cdf(self, z: ArrayLike) -> Any:
        return _out(reg_inc_gamma(self.alpha, self.beta * np.asarray(z, dtype=float)))

    def sf(self, z: ArrayLike) -> Any:
        return _out(reg_inc_gamma_upper(self.alpha, self.beta * np.asarray(z, dtype=float)))

    def ppf(self, u: ArrayLike) -> Any:
        return _out(special.gammaincinv(self.alpha, np.asarray(u, dtype=float)) / self.beta)

    def sample(self, rng: np.random.Generator, size: int | tuple[int, ...]) -> Array:
        return rng.gamma(self.alpha, 1.0 / np.asarray(self.beta, dtype=float), size)

    def score(self, z: ArrayLike, index: int) -> Any:
        z_arr = np.asarray(z, dtype=float)
        if self.param_index(index) == 0:
            return _out(np.log(self.beta * z_arr) - special.psi(self.alpha))
        return _out(self.alpha / self.beta - z_arr)

    def dcdf_dtheta(self, z: ArrayLike, index: int) -> Any:
        if self.mode == "oracle":
            return super().dcdf_dtheta(z, index)
        return _out(-np.asarray(self.dz_dtheta(z, index)) * np.asarray(self.pdf(z)))

    def dz_dtheta(self, z: ArrayLike, index: int) -> Any:
        index = self.param_index(index)
        if self.mode == "oracle":
            return super().dz_dtheta(z, index)
        return gamma_dz_dparams(z, self.alpha, self.beta)[index]


# =============================================================================
# Beta
# =============================================================================


@dataclass(frozen=True, eq=False)
class Beta(ScalarDistribution):
    """Beta(α, β)."""

    alpha: Any = 1.0
    beta: Any = 1.0
    mode: DerivativeMode = "approx"

    param_names: ClassVar[tuple[str, ...]] = ("alpha", "beta")
    positive_params: ClassVar[tuple[bool, ...]] = (True, True)

    def __post_init__(self):
        check_positive("alpha", self.alpha)
        check_positive("beta", self.beta)
        _mode_kind(self.mode)

    @property
    def derivative_kind(self) -> DerivativeKind:
        return _mode_kind(self.mode)

    @property
    def support(self) -> tuple[float, float]:
        return (0.0, 1.0)

    def logpdf(self, z: ArrayLike) -> Any:
        z_arr = np.asarray(z, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            value = (
                (self.alpha - 1.0) * np.log(z_arr)
                + (self.beta - 1.0) * np.log1p(-z_arr)
                - special.betaln(self.alpha, self.beta)
            )
        return _out(np.where((z_arr > 0) & (z_arr < 1), value, -np.inf))

    def pdf(self, z: ArrayLike) -> Any:
        return _out(np.exp(self.logpdf(z)))

    def cdf(self, z: ArrayLike) -> Any:
        return _out(reg_inc_beta(self.alpha, self.beta, z))

    def sf(self, z: ArrayLike) -> Any:
        return _out(reg_inc_beta_upper(self.alpha, self.beta, z))

    def ppf(self, u: ArrayLike) -> Any:
        return _out(special.betaincinv(self.alpha, self.beta, np.asarray(u, dtype=float)))

    def sample(self, rng: np.random.Generator, size: int | tuple[int, ...]) -> Array:
        return rng.beta(self.alpha, self.beta, size)

    def score(self, z: ArrayLike, index: int) -> Any:
        z_arr = np.asarray(z, dtype=float)
        total = special.psi(np.asarray(self.alpha) + self.beta)
        if self.param_index(index) == 0:
            return _out(np.log(z_arr) - special.psi(self.alpha) + total)
        return _out(np.log1p(-z_arr) - special.psi(self.beta) + total)

    def dcdf_dtheta(self, z: ArrayLike, index: int) -> Any:
        if self.mode == "oracle":
            return super().dcdf_dtheta(z, index)
        return _out(-np.asarray(self.dz_dtheta(z, index)) * np.asarray(self.pdf(z)))

    def dz_dtheta(self, z: ArrayLike, index: int) -> Any:
        index = self.param_index(index)
        if self.mode == "oracle":
            return super().dz_dtheta(z, index)
        if index == 0:
            return beta_dz_dalpha(z, self.alpha, self.beta)
        return beta_dz_dbeta(z, self.alpha, self.beta)


@dataclass(frozen=True, eq=False)
class SymmetricBeta(ScalarDistribution):
    """Beta(α, α) with one tied shape parameter."""

    alpha: Any = 1.0
    mode: DerivativeMode = "approx"

    param_names: ClassVar[tuple[str, ...]] = ("alpha",)
    positive_params: ClassVar[tuple[bool, ...]] = (True,)

    def __post_init__(self):
        check_positive("alpha", self.alpha)
        _mode_kind(self.mode)

    @property
    def derivative_kind(self) -> DerivativeKind:
        return _mode_kind(self.mode)

    @property
    def _beta(self) -> Beta:
        return Beta(self.alpha, self.alpha, self.mode)

    @property
    def support(self) -> tuple[float, float]:
        return (0.0, 1.0)

    def logpdf(self, z: ArrayLike) -> Any:
        return self._beta.logpdf(z)

    def pdf(self, z: ArrayLike) -> Any:
        return self._beta.pdf(z)

    def cdf(self, z: ArrayLike) -> Any:
        return self._beta.cdf(z)

    def sf(self, z: ArrayLike) -> Any:
        return self._beta.sf(z)

    def ppf(self, u: ArrayLike) -> Any:
        return self._beta.ppf(u)

    def sample(self, rng: np.random.Generator, size: int | tuple[int, ...]) -> Array:
        return rng.beta(self.alpha, self.alpha, size)

    def score(self, z: ArrayLike, index: int) -> Any:
        self.param_index(index)
        return _out(np.asarray(self._beta.score(z, 0)) + np.asarray(self._beta.score(z, 1)))

    def dcdf_dtheta(self, z: ArrayLike, index: int) -> Any:
        if self.mode == "oracle":
            return super().dcdf_dtheta(z, index)
        return _out(-np.asarray(self.dz_dtheta(z, index)) * np.asarray(self.pdf(z)))

    def dz_dtheta(self, z: ArrayLike, index: int) -> Any:
        self.param_index(index)
        if self.mode == "oracle":
            return super().dz_dtheta(z, index)
        # Both shapes move together
        return _out(
            np.asarray(beta_dz_dalpha(z, self.alpha, self.alpha))
            + np.asarray(beta_dz_dbeta(z, self.alpha, self.alpha))
        )


DistributionRegistry.register("normal", Normal)
DistributionRegistry.register("truncated-normal", TruncatedUnitNormal)
DistributionRegistry.register("gamma", Gamma)
DistributionRegistry.register("beta", Beta)
DistributionRegistry.register("symmetric-beta", SymmetricBeta)
