"""Master formula dz/dθ = −(∂F_θ/∂θ)(z)/q_θ(z)."""

from __future__ import annotations

from typing import TYPE_CHECKING, Any

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import special

from pathgrad.core.constants import DENSITY_FLOOR
from pathgrad.core.exceptions import DomainError, SingularDensityError

if TYPE_CHECKING:
    from pathgrad.univariate.base import ScalarDistribution


def check_master_inputs(dist: ScalarDistribution, z: ArrayLike) -> NDArray[np.float64]:
    """Support and density checks shared by master-formula evaluations.

    Returns:
        q_θ(z)
    """
    z_arr = np.asarray(z, dtype=float)
    if np.any(np.isnan(z_arr)) or not np.all(dist.in_support(z_arr)):
        raise DomainError(f"z outside the support of {type(dist).__name__}")
    density = np.asarray(dist.pdf(z_arr), dtype=float)
    if np.any(density < DENSITY_FLOOR):
        raise SingularDensityError(f"Density below {DENSITY_FLOOR:g} in master formula")
    return density


def pathwise_dz_dtheta(dist: ScalarDistribution, z: ArrayLike, theta_index: int | str) -> Any:
    """Pathwise derivative of z with respect to θ_i.

    Families with analytic or fast approximate derivatives use them; the
    rest fall back to the oracle CDF derivative.

    Args:
        dist: Distribution
        z: Point(s) in the support
        theta_index: Parameter index or name

    Raises:
        DomainError: If z is outside the support
        SingularDensityError: If q_θ(z) < 1e-300
    """
    index = dist.param_index(theta_index)
    z_arr = np.asarray(z, dtype=float)
    check_master_inputs(dist, z_arr)
    return dist.dz_dtheta(z_arr if z_arr.ndim else float(z_arr), index)


def truncated_normal_dz_dkappa(z: ArrayLike, kappa: ArrayLike) -> Any:
    """dz/dκ for the unit Normal truncated to [0, κ].

    Closed form e^{(z²−κ²)/2}·erf(z/√2)/erf(κ/√2): 0 at z = 0, 1 at z = κ.

    Raises:
        DomainError: If κ ≤ 0 or z ∉ [0, κ]
    """
    z_arr, k_arr = np.broadcast_arrays(np.asarray(z, dtype=float), np.asarray(kappa, dtype=float))
    if np.any(np.isnan(k_arr)) or np.any(k_arr <= 0):
        raise DomainError("kappa must be positive")
    if np.any(np.isnan(z_arr)) or np.any((z_arr < 0) | (z_arr > k_arr)):
        raise DomainError("Truncated Normal derivative requires 0 <= z <= kappa")
    root2 = np.sqrt(2.0)
    out = np.exp(0.5 * (z_arr * z_arr - k_arr * k_arr)) * special.erf(z_arr / root2) / special.erf(k_arr / root2)
    out = np.where(z_arr == k_arr, 1.0, out)
    return out.item() if out.ndim == 0 else out
