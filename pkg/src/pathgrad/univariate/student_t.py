"""Student's t as a Gamma-Normal composition.

τ ~ Gamma(ν/2, 1), ε ~ N(0, 1) and z = √(ν/2)·ε/√τ has a t distribution
with ν degrees of freedom. The pathwise derivative chains the explicit
√(ν/2) factor with the Gamma shape derivative of τ:

    dz/dν = z/(2ν) − z/(4τ)·dτ/dα|_{α=ν/2}
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, ClassVar

import numpy as np
from numpy.typing import ArrayLike
from scipy import special

from pathgrad.shape_grad.gamma import gamma_dz_dalpha
from pathgrad.univariate.base import Array, DistributionRegistry, ScalarDistribution, check_positive

TAU_FLOOR = np.finfo(float).tiny


def _out(value: Any) -> Any:
    arr = np.asarray(value, dtype=float)
    return arr.item() if arr.ndim == 0 else arr


def student_t_compose(nu: ArrayLike, tau: ArrayLike, eps: ArrayLike) -> tuple[Array, Array]:
    """(z, dz/dν) for given auxiliary draws τ ~ Gamma(ν/2) and ε ~ N(0, 1).

    Raises:
        DomainError: If ν ≤ 0 (propagated from the Gamma derivative)
    """
    check_positive("nu", nu)
    nu_arr = np.asarray(nu, dtype=float)
    tau_arr = np.maximum(np.asarray(tau, dtype=float), TAU_FLOOR)
    z = np.sqrt(0.5 * nu_arr) * np.asarray(eps, dtype=float) / np.sqrt(tau_arr)
    dtau = np.asarray(gamma_dz_dalpha(tau_arr, 0.5 * nu_arr), dtype=float)
    dz = z / (2.0 * nu_arr) - z / (4.0 * tau_arr) * dtau
    return z, dz


def student_t_pathwise_sample(
    nu: float, rng: np.random.Generator, size: int | tuple[int, ...] | None = None
) -> tuple[Any, Any]:
    """Sample z ~ t_ν together with its pathwise derivative dz/dν.

    Args:
        nu: Degrees of freedom, positive
        rng: Random stream (callers own substream management)
        size: Output shape; None for a scalar pair

    Returns:
        (z, dz/dν)
    """
    check_positive("nu", nu)
    tau = rng.gamma(0.5 * nu, 1.0, size)
    eps = rng.standard_normal(size)
    z, dz = student_t_compose(nu, tau, eps)
    return _out(z), _out(dz)


@dataclass(frozen=True, eq=False)
class StudentT(ScalarDistribution):
    """Student's t with ν degrees of freedom (location 0, scale 1)."""

    nu: Any = 1.0

    param_names: ClassVar[tuple[str, ...]] = ("nu",)
    positive_params: ClassVar[tuple[bool, ...]] = (True,)

    def __post_init__(self):
        check_positive("nu", self.nu)

    @property
    def support(self) -> tuple[float, float]:
        return (-np.inf, np.inf)

    def logpdf(self, z: ArrayLike) -> Any:
        z_arr = np.asarray(z, dtype=float)
        nu = np.asarray(self.nu, dtype=float)
        return _out(
            special.gammaln(0.5 * (nu + 1.0))
            - special.gammaln(0.5 * nu)
            - 0.5 * np.log(nu * np.pi)
            - 0.5 * (nu + 1.0) * np.log1p(z_arr * z_arr / nu)
        )

    def pdf(self, z: ArrayLike) -> Any:
        return _out(np.exp(self.logpdf(z)))

    def cdf(self, z: ArrayLike) -> Any:
        return _out(special.stdtr(self.nu, np.asarray(z, dtype=float)))

    def sf(self, z: ArrayLike) -> Any:
        return _out(special.stdtr(self.nu, -np.asarray(z, dtype=float)))

    def ppf(self, u: ArrayLike) -> Any:
        return _out(special.stdtrit(self.nu, np.asarray(u, dtype=float)))

    def base_noise(self, rng: np.random.Generator, size: int | tuple[int, ...]) -> Array:
        """Stacked (u, ε): u drives τ by inverse CDF, ε is standard Normal."""
        shape = (size,) if isinstance(size, int) else tuple(size)
        return np.stack([rng.uniform(size=shape), rng.standard_normal(shape)], axis=-1)

    def from_noise(self, noise: ArrayLike) -> Array:
        return self.compose(noise)[0]

    def compose(self, noise: ArrayLike) -> tuple[Array, Array]:
        """(z, dz/dν) from base noise."""
        arr = np.asarray(noise, dtype=float)
        tau = special.gammaincinv(0.5 * np.asarray(self.nu, dtype=float), arr[..., 0])
        return student_t_compose(self.nu, tau, arr[..., 1])

    def sample(self, rng: np.random.Generator, size: int | tuple[int, ...]) -> Array:
        return student_t_pathwise_sample(self.nu, rng, size)[0]

    def score(self, z: ArrayLike, index: int) -> Any:
        self.param_index(index)
        z_arr = np.asarray(z, dtype=float)
        nu = np.asarray(self.nu, dtype=float)
        return _out(
            0.5 * (special.psi(0.5 * (nu + 1.0)) - special.psi(0.5 * nu))
            - 0.5 / nu
            - 0.5 * np.log1p(z_arr * z_arr / nu)
            + (nu + 1.0) * z_arr * z_arr / (2.0 * nu * (nu + z_arr * z_arr))
        )


DistributionRegistry.register("student-t", StudentT)
