"""Oracle dz/dθ for the standard Gamma and the Beta distribution.

Array-in/array-out references built straight on specfun, used as the slow
exact path of shape_grad and as training data for the rational fitter.
"""

from __future__ import annotations

from typing import Any

import numpy as np
from numpy.typing import ArrayLike
from scipy import special

from pathgrad.core.constants import DENSITY_FLOOR
from pathgrad.core.exceptions import DomainError, SingularDensityError
from pathgrad.core.specfun import (
    reg_inc_beta,
    reg_inc_beta_upper,
    reg_inc_gamma,
    reg_inc_gamma_upper,
)
from pathgrad.oracle.models import OracleConfig
from pathgrad.oracle.richardson import EPS, parameter_step
from pathgrad.oracle.oracle import tail_cdf_derivative


def _unwrap(value: np.ndarray) -> Any:
    return value.item() if value.ndim == 0 else value


# Rounding of the series or continued fraction itself, on top of its prefactor
FRACTION_ROUNDING = 16.0


def _prefactor_rtol(*log_terms: np.ndarray) -> np.ndarray:
    """Relative rounding of exp(Σ log_terms), the front factor of both incomplete functions."""
    return EPS * (FRACTION_ROUNDING + sum(np.abs(term) for term in log_terms))


def _divide_by_density(dcdf: np.ndarray, log_density: np.ndarray) -> np.ndarray:
    if np.any(log_density < np.log(DENSITY_FLOOR)):
        raise SingularDensityError(f"Density below {DENSITY_FLOOR:g} in master formula")
    return -dcdf * np.exp(-log_density)


def gamma_dz_dalpha_reference(z: ArrayLike, alpha: ArrayLike, config: OracleConfig | None = None) -> Any:
    """dz/dα for z ~ Gamma(α, 1) by the finite-difference oracle.

    Raises:
        DomainError: If z ≤ 0 or α ≤ 0
    """
    config = config or OracleConfig.from_config()
    z_arr, a_arr = np.broadcast_arrays(np.asarray(z, dtype=float), np.asarray(alpha, dtype=float))
    if np.any(z_arr <= 0) or np.any(a_arr <= 0):
        raise DomainError("Gamma reference requires z > 0 and alpha > 0")
    step = parameter_step(a_arr, config.fd_base_step)
    result = tail_cdf_derivative(
        lambda t: reg_inc_gamma(t, z_arr),
        lambda t: reg_inc_gamma_upper(t, z_arr),
        a_arr,
        step,
        config.richardson_levels,
        _prefactor_rtol(a_arr * np.log(z_arr), z_arr, special.gammaln(a_arr)),
    )
    log_density = (a_arr - 1.0) * np.log(z_arr) - z_arr - special.gammaln(a_arr)
    return _unwrap(_divide_by_density(np.asarray(result.value), log_density))


def beta_dz_dalpha_reference(
    z: ArrayLike, alpha: ArrayLike, beta: ArrayLike, config: OracleConfig | None = None
) -> Any:
    """dz/dα for z ~ Beta(α, β) by the finite-difference oracle.

    Raises:
        DomainError: If z ∉ (0, 1) or a parameter is nonpositive
    """
    config = config or OracleConfig.from_config()
    z_arr, a_arr, b_arr = np.broadcast_arrays(
        np.asarray(z, dtype=float), np.asarray(alpha, dtype=float), np.asarray(beta, dtype=float)
    )
    if np.any((z_arr <= 0) | (z_arr >= 1)) or np.any(a_arr <= 0) or np.any(b_arr <= 0):
        raise DomainError("Beta reference requires z in (0, 1) and positive parameters")
    step = parameter_step(a_arr, config.fd_base_step)
    result = tail_cdf_derivative(
        lambda t: reg_inc_beta(t, b_arr, z_arr),
        lambda t: reg_inc_beta_upper(t, b_arr, z_arr),
        a_arr,
        step,
        config.richardson_levels,
        _prefactor_rtol(a_arr * np.log(z_arr), b_arr * np.log1p(-z_arr), special.betaln(a_arr, b_arr)),
    )
    log_density = (
        (a_arr - 1.0) * np.log(z_arr) + (b_arr - 1.0) * np.log1p(-z_arr) - special.betaln(a_arr, b_arr)
    )
    return _unwrap(_divide_by_density(np.asarray(result.value), log_density))


def beta_dz_dbeta_reference(
    z: ArrayLike, alpha: ArrayLike, beta: ArrayLike, config: OracleConfig | None = None
) -> Any:
    """dz/dβ for z ~ Beta(α, β) via the mirror identity on the oracle."""
    mirrored = np.asarray(beta_dz_dalpha_reference(1.0 - np.asarray(z, dtype=float), beta, alpha, config))
    return _unwrap(-mirrored)
