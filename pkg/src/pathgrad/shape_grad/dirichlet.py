"""Pathwise derivatives for the Dirichlet distribution.

With z = (z_1, ..., z_n) ~ Dir(α) and α_tot = Σα_k, the velocity field for
α_j is

    dz_i/dα_j = D_j·(δ_ij − z_i)/(1 − z_j),   D_j = dz_j/dα_j under Beta(α_j, α_tot − α_j)

so every column sums to zero and samples stay on the simplex.
"""

from __future__ import annotations

from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

from pathgrad.core.exceptions import DomainError, SimplexError
from pathgrad.oracle.reference import beta_dz_dalpha_reference
from pathgrad.shape_grad.beta import beta_dz_dalpha

Array = NDArray[np.float64]
FactorSource = Literal["approx", "oracle"]

SIMPLEX_TOLERANCE = 1e-12


def _validate(z: ArrayLike, alpha: ArrayLike) -> tuple[Array, Array]:
    z_arr = np.asarray(z, dtype=float)
    a_arr = np.asarray(alpha, dtype=float)
    if z_arr.ndim == 0 or z_arr.shape[-1] < 2:
        raise SimplexError("Dirichlet samples need at least two components")
    a_arr = np.broadcast_to(a_arr, z_arr.shape)
    if np.any(np.isnan(a_arr)) or np.any(a_arr <= 0):
        raise DomainError("Dirichlet concentrations must be positive")
    if np.any(np.isnan(z_arr)) or np.any(z_arr <= 0):
        raise SimplexError("Dirichlet sample has a nonpositive component")
    if np.any(np.abs(z_arr.sum(axis=-1) - 1.0) > SIMPLEX_TOLERANCE):
        raise SimplexError(f"Dirichlet sample is off the simplex by more than {SIMPLEX_TOLERANCE:g}")
    return z_arr, a_arr


def _beta_factor(z_j: Array, alpha_j: Array, rest: Array, factor: FactorSource) -> Array:
    if np.any(z_j >= 1.0):
        raise SimplexError("Dirichlet component equals 1; the Beta marginal is degenerate")
    if factor == "approx":
        return np.asarray(beta_dz_dalpha(z_j, alpha_j, rest), dtype=float)
    if factor == "oracle":
        return np.asarray(beta_dz_dalpha_reference(z_j, alpha_j, rest), dtype=float)
    raise ValueError(f"Unknown Beta factor source: {factor}")


def marginal_factors(z: ArrayLike, alpha: ArrayLike, factor: FactorSource = "approx") -> Array:
    """D_j/(1 − z_j) for every component j, shape like z."""
    z_arr, a_arr = _validate(z, alpha)
    total = a_arr.sum(axis=-1, keepdims=True)
    d = _beta_factor(z_arr, a_arr, total - a_arr, factor)
    return d / (1.0 - z_arr)


def dirichlet_dz_dalpha(z: ArrayLike, alpha: ArrayLike, j: int, factor: FactorSource = "approx") -> Array:
    """Column j of the Dirichlet pathwise Jacobian.

    Args:
        z: Sample(s) on the simplex, shape (..., n)
        alpha: Concentrations, shape (n,) or broadcastable to z
        j: Parameter index
        factor: "approx" uses the fast Beta derivative, "oracle" the reference

    Returns:
        dz/dα_j, shape like z

    Raises:
        SimplexError: If z is not on the open simplex or z_j = 1
        DomainError: If a concentration is nonpositive
    """
    z_arr, a_arr = _validate(z, alpha)
    n = z_arr.shape[-1]
    if not -n <= j < n:
        raise IndexError(f"Parameter index {j} out of range for {n} components")
    z_j = z_arr[..., j]
    alpha_j = a_arr[..., j]
    rest = a_arr.sum(axis=-1) - alpha_j
    scale = _beta_factor(z_j, alpha_j, rest, factor) / (1.0 - z_j)
    column = -z_arr * scale[..., None]
    column[..., j] += scale
    return column


def dirichlet_jacobian(z: ArrayLike, alpha: ArrayLike, factor: FactorSource = "approx") -> Array:
    """Full Jacobian with [..., i, j] = dz_i/dα_j."""
    z_arr, _ = _validate(z, alpha)
    scale = marginal_factors(z, alpha, factor)
    n = z_arr.shape[-1]
    return (np.eye(n) - z_arr[..., :, None]) * scale[..., None, :]


def dirichlet_velocity_contraction(
    z: ArrayLike, alpha: ArrayLike, grad: ArrayLike, factor: FactorSource = "approx"
) -> Array:
    """∇f·(dz/dα_j) for every j without forming the Jacobian.

    Equals D_j/(1 − z_j)·(∂f/∂z_j − Σ_i z_i ∂f/∂z_i).
    """
    z_arr, _ = _validate(z, alpha)
    g = np.asarray(grad, dtype=float)
    centered = g - np.sum(z_arr * g, axis=-1, keepdims=True)
    return marginal_factors(z_arr, alpha, factor) * centered
