"""High-precision ground truth for ∂F_θ(z)/∂θ and dz/dθ.

The oracle only needs a distribution's CDF (or density and score), so it is
independent of every approximation it is used to audit.
"""

from __future__ import annotations

import logging
from collections.abc import Callable
from typing import TYPE_CHECKING, Any

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import integrate

from pathgrad.core.constants import DENSITY_FLOOR
from pathgrad.core.exceptions import DomainError, SingularDensityError
from pathgrad.oracle.models import OracleConfig, OracleResult, OracleScheme
from pathgrad.oracle.richardson import EPS, parameter_step, richardson_central_difference

if TYPE_CHECKING:
    from pathgrad.univariate.base import ScalarDistribution

logger = logging.getLogger(__name__)


def tail_cdf_derivative(
    cdf: Callable[[NDArray[np.float64]], NDArray[np.float64]],
    sf: Callable[[NDArray[np.float64]], NDArray[np.float64]],
    theta: ArrayLike,
    step: ArrayLike,
    levels: int,
    value_rtol: ArrayLike = EPS,
) -> OracleResult:
    """Differentiate F in θ on whichever tail is smaller.

    Where F(θ) ≤ ½ the CDF itself is differenced; elsewhere −∂(1 − F)/∂θ is
    used so upper-tail derivatives keep their relative accuracy.

    Args:
        cdf: θ ↦ F_θ(z) (vectorized over θ)
        sf: θ ↦ 1 − F_θ(z)
        theta: Parameter value(s)
        step: Initial FD step(s)
        levels: Richardson depth
        value_rtol: Relative rounding level of the CDF values
    """
    theta_arr = np.asarray(theta, dtype=float)
    lower = np.asarray(cdf(theta_arr)) <= 0.5

    def tail(t: NDArray[np.float64]) -> NDArray[np.float64]:
        return np.where(lower, cdf(t), -np.asarray(sf(t)))

    return richardson_central_difference(tail, theta_arr, step, levels, value_rtol)


def _check_support(dist: ScalarDistribution, z: NDArray[np.float64]) -> None:
    low, high = dist.support
    if np.any(np.isnan(z)) or np.any((z < low) | (z > high)):
        raise DomainError(f"z outside the support [{low}, {high}] of {type(dist).__name__}")


def _series_dcdf(dist: ScalarDistribution, z: NDArray[np.float64], index: int,
                 config: OracleConfig) -> OracleResult:
    theta = np.asarray(dist.theta[index], dtype=float)
    step = parameter_step(theta, config.fd_base_step, dist.is_positive(index))
    theta, step = np.broadcast_arrays(theta, step)
    theta = np.broadcast_to(theta, np.broadcast(theta, z).shape)
    step = np.broadcast_to(step, theta.shape)

    def cdf(t: NDArray[np.float64]) -> NDArray[np.float64]:
        return np.asarray(dist.with_param(index, t).cdf(z))

    def sf(t: NDArray[np.float64]) -> NDArray[np.float64]:
        return np.asarray(dist.with_param(index, t).sf(z))

    return tail_cdf_derivative(cdf, sf, theta, step, config.richardson_levels)


def _quad_cdf(dist: ScalarDistribution, z: float, lower_tail: bool, tol: float) -> float:
    low, high = dist.support
    if lower_tail:
        value, _ = integrate.quad(dist.pdf, low, z, epsabs=tol, epsrel=1e-13, limit=200)
        return value
    value, _ = integrate.quad(dist.pdf, z, high, epsabs=tol, epsrel=1e-13, limit=200)
    return -value


def _pointwise(dist: ScalarDistribution, z: NDArray[np.float64], index: int,
               config: OracleConfig) -> OracleResult:
    """Scalar loop for the two quadrature-based schemes."""
    if any(np.ndim(p) > 0 for p in dist.theta):
        raise DomainError("Quadrature oracle schemes need scalar distribution parameters")
    values = np.empty(z.shape)
    errors = np.empty(z.shape)
    theta = float(dist.theta[index])
    step = float(parameter_step(theta, config.fd_base_step, dist.is_positive(index)))
    for pos, zk in np.ndenumerate(z):
        lower_tail = bool(dist.cdf(zk) <= 0.5)
        if config.scheme is OracleScheme.QUADRATURE:
            def func(t: NDArray[np.float64], zk: float = float(zk), lower_tail: bool = lower_tail) -> NDArray[np.float64]:
                flat = np.atleast_1d(t)
                out = [_quad_cdf(dist.with_param(index, float(tk)), zk, lower_tail,
                                 config.quadrature_abs_tol) for tk in flat]
                return np.asarray(out).reshape(np.shape(t))

            result = richardson_central_difference(func, theta, step, config.richardson_levels)
            values[pos], errors[pos] = result.value, result.error_estimate
        else:
            def integrand(t: float) -> float:
                return float(dist.pdf(t) * dist.score(t, index))

            low, high = dist.support
            if lower_tail:
                value, err = integrate.quad(integrand, low, zk, epsabs=config.quadrature_abs_tol,
                                            epsrel=1e-12, limit=200)
            else:
                value, err = integrate.quad(integrand, zk, high, epsabs=config.quadrature_abs_tol,
                                            epsrel=1e-12, limit=200)
                value = -value
            values[pos], errors[pos] = value, err
    return OracleResult(value=values, error_estimate=errors)


def oracle_dcdf_dtheta_result(
    dist: ScalarDistribution,
    z: ArrayLike,
    theta_index: int,
    config: OracleConfig | None = None,
) -> OracleResult:
    """∂F_θ(z)/∂θ_i with an error estimate.

    Args:
        dist: Distribution with a computable CDF
        z: Point(s) in the support
        theta_index: Index into ``dist.param_names``
        config: Oracle settings (default from the global Config)

    Raises:
        DomainError: If z is outside the support
        RichardsonError: If the extrapolation sequence does not contract
    """
    config = config or OracleConfig.from_config()
    z_arr = np.asarray(z, dtype=float)
    _check_support(dist, z_arr)
    if config.scheme is OracleScheme.SERIES:
        result = _series_dcdf(dist, z_arr, theta_index, config)
    else:
        result = _pointwise(dist, z_arr, theta_index, config)
    if z_arr.ndim == 0:
        return OracleResult(float(np.asarray(result.value)), float(np.asarray(result.error_estimate)))
    return result


def oracle_dcdf_dtheta(
    dist: ScalarDistribution,
    z: ArrayLike,
    theta_index: int,
    config: OracleConfig | None = None,
) -> Any:
    """∂F_θ(z)/∂θ_i by Richardson-extrapolated central differences of the CDF."""
    return oracle_dcdf_dtheta_result(dist, z, theta_index, config).value


def oracle_dz_dtheta(
    dist: ScalarDistribution,
    z: ArrayLike,
    theta_index: int,
    config: OracleConfig | None = None,
) -> Any:
    """Master formula dz/dθ_i = −(∂F/∂θ_i)(z)/q_θ(z) evaluated with the oracle.

    Raises:
        SingularDensityError: If q_θ(z) < 1e-300 anywhere
    """
    z_arr = np.asarray(z, dtype=float)
    _check_support(dist, z_arr)
    density = np.asarray(dist.pdf(z_arr), dtype=float)
    if np.any(density < DENSITY_FLOOR):
        raise SingularDensityError(f"Density below {DENSITY_FLOOR:g} in master formula")
    dcdf = np.asarray(oracle_dcdf_dtheta(dist, z_arr, theta_index, config))
    out = -dcdf / density
    return out.item() if out.ndim == 0 else out


def dual_scheme_dcdf_dtheta(
    dist: ScalarDistribution,
    z: ArrayLike,
    theta_index: int,
    schemes: tuple[OracleScheme, OracleScheme] = (OracleScheme.SERIES, OracleScheme.DENSITY),
    config: OracleConfig | None = None,
) -> tuple[Any, Any, float]:
    """Evaluate ∂F/∂θ_i by two independent schemes.

    Returns:
        (first, second, max relative discrepancy)
    """
    base = config or OracleConfig.from_config()
    first = np.asarray(oracle_dcdf_dtheta(dist, z, theta_index, base.model_copy(update={"scheme": schemes[0]})))
    second = np.asarray(oracle_dcdf_dtheta(dist, z, theta_index, base.model_copy(update={"scheme": schemes[1]})))
    scale = np.maximum(np.abs(first), 1e-300)
    discrepancy = float(np.max(np.abs(first - second) / scale))
    logger.debug("Dual-scheme discrepancy %.3g", discrepancy)
    unwrap = (lambda a: a.item()) if first.ndim == 0 else (lambda a: a)
    return unwrap(first), unwrap(second), discrepancy
