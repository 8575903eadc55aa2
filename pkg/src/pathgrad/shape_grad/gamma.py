"""Pathwise derivatives for the Gamma distribution.

dz/dα for the standard Gamma (rate 1) is approximated region by region:

    z < 0.8                      6-term Taylor series of γ(α, z)
    α > 8, |z − α| > 0.1·α       Lugannani-Rice, far branch
    α > 8, |z − α| ≤ 0.1·α       Lugannani-Rice, expanded about z = α
    otherwise                    fitted rational surface exp(p/q)

The rate parameter follows from the scale-family identity z/β ~ Gamma(α, β).
"""

from __future__ import annotations

from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import special

from pathgrad.core.exceptions import CoefficientFileError, DomainError
from pathgrad.oracle.reference import gamma_dz_dalpha_reference
from pathgrad.shape_grad.regions import FormulaKind, Region, RegionedApprox
from pathgrad.shape_grad.registry import get_registry

Array = NDArray[np.float64]

TAYLOR_TERMS = 6
TAYLOR_Z_LIMIT = 0.8
LR_MIN_ALPHA = 8.0
LR_NEAR_WIDTH = 0.1  # δ, relative to α


def stirling_factor(alpha: Array) -> Array:
    """S_α = 1 + 1/(12α) + 1/(288α²)."""
    return 1.0 + 1.0 / (12.0 * alpha) + 1.0 / (288.0 * alpha**2)


def _taylor(z: Array, alpha: Array) -> Array:
    # −z·e^z·[(log z − ψ(α))·Σ c_n/(α+n) − Σ c_n/(α+n)²], c_n = (−z)^n/n!
    s1 = np.zeros_like(z)
    s2 = np.zeros_like(z)
    coeff = np.ones_like(z)
    for n in range(TAYLOR_TERMS):
        if n:
            coeff = coeff * (-z) / n
        inv = 1.0 / (alpha + n)
        s1 += coeff * inv
        s2 += coeff * inv * inv
    return -z * np.exp(z) * ((np.log(z) - special.psi(alpha)) * s1 - s2)


def _lr_far(z: Array, alpha: Array) -> Array:
    sign = np.where(z < alpha, 1.0, -1.0)
    log_ratio = np.log(z / alpha)
    gap = z - alpha
    tail = (gap - alpha * log_ratio) ** -1.5
    bracket = (
        np.sqrt(2.0 / alpha) * (alpha + z) / gap**2
        + log_ratio * (np.sqrt(8.0 * alpha) / gap + sign * tail)
    )
    return z * stirling_factor(alpha) / np.sqrt(8.0 * alpha) * bracket


def _lr_near(z: Array, alpha: Array) -> Array:
    numerator = (
        1440.0 * alpha**3
        + 6.0 * alpha * z * (53.0 - 120.0 * z)
        - 65.0 * z**2
        + alpha**2 * (107.0 + 3600.0 * z)
    )
    return numerator * (1.0 + 24.0 * alpha + 288.0 * alpha**2) / (1244160.0 * alpha**5)


def _rational(z: Array, alpha: Array) -> Array:
    registry = get_registry()
    surface = registry.surface("gamma")
    if surface is None:
        if registry.fallback == "error":
            raise CoefficientFileError("Gamma rational surface not loaded")
        registry.warn_fallback("gamma")
        return np.asarray(gamma_dz_dalpha_reference(z, alpha), dtype=float)
    return surface.evaluate(z, alpha)


GAMMA_DZ_DALPHA = RegionedApprox(
    "gamma_dz_dalpha",
    [
        Region("taylor", FormulaKind.TAYLOR, lambda z, a: z < TAYLOR_Z_LIMIT, _taylor),
        Region(
            "lr_near",
            FormulaKind.LR_NEAR,
            lambda z, a: (a > LR_MIN_ALPHA) & (np.abs(z - a) <= LR_NEAR_WIDTH * a),
            _lr_near,
        ),
        Region("lr_far", FormulaKind.LR_FAR, lambda z, a: a > LR_MIN_ALPHA, _lr_far),
        Region("rational", FormulaKind.RATIONAL, lambda z, a: np.ones(z.shape, dtype=bool), _rational),
    ],
)


def _positive(name: str, value: Array) -> None:
    if np.any(np.isnan(value)) or np.any(value <= 0):
        raise DomainError(f"{name} must be positive")


def _unwrap(value: Array, scalar: bool) -> Any:
    return value.item() if scalar else value


def gamma_dz_dalpha(z: ArrayLike, alpha: ArrayLike) -> Any:
    """dz/dα for z ~ Gamma(α, 1).

    Args:
        z: Sample value(s), positive
        alpha: Shape parameter(s), positive

    Returns:
        dz/dα (float for scalar input, otherwise an array)

    Raises:
        DomainError: On nonpositive inputs
    """
    z_arr, a_arr = np.broadcast_arrays(np.asarray(z, dtype=float), np.asarray(alpha, dtype=float))
    _positive("z", z_arr)
    _positive("alpha", a_arr)
    out = GAMMA_DZ_DALPHA.evaluate(z_arr, a_arr)
    return _unwrap(out, np.ndim(z) == 0 and np.ndim(alpha) == 0)


def gamma_dz_dparams(z: ArrayLike, alpha: ArrayLike, beta: ArrayLike) -> tuple[Any, Any]:
    """(dz/dα, dz/dβ) for z ~ Gamma(α, β) with rate β.

    dz/dα = gamma_dz_dalpha(βz, α)/β and dz/dβ = −z/β.
    """
    z_arr, a_arr, b_arr = np.broadcast_arrays(
        np.asarray(z, dtype=float), np.asarray(alpha, dtype=float), np.asarray(beta, dtype=float)
    )
    _positive("z", z_arr)
    _positive("alpha", a_arr)
    _positive("beta", b_arr)
    scalar = all(np.ndim(v) == 0 for v in (z, alpha, beta))
    d_alpha = GAMMA_DZ_DALPHA.evaluate(b_arr * z_arr, a_arr) / b_arr
    d_beta = -z_arr / b_arr
    return _unwrap(d_alpha, scalar), _unwrap(d_beta, scalar)


def gamma_region_ids(z: ArrayLike, alpha: ArrayLike) -> Any:
    """Region id used for each (z, α)."""
    labels = GAMMA_DZ_DALPHA.labels(z, alpha)
    return labels.item() if labels.ndim == 0 else labels
