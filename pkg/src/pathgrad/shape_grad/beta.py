"""Pathwise derivatives for the Beta distribution.

dz/dα regions, first match wins:

    taylor          z ≤ 0.5 and ξ < 2.5,  ξ = z(1−z)(α+β)
    taylor_mirror   z ≥ 0.5 and ξ < 0.75  (series in 1 − z via Beta(z|α,β) = Beta(1−z|β,α))
    lr_near         α > 6, β > 6, |z − mean| ≤ 0.1·σ
    lr_far          α > 6, β > 6
    rational        fitted surface times z(1−z)/β·(ψ(α+β) − ψ(α))

dz/dβ is obtained exactly from dz/dα through the mirror identity
dz/dβ(z; α, β) = −dz/dα(1 − z; β, α).
"""

from __future__ import annotations

from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import special

from pathgrad.core.exceptions import CoefficientFileError, DomainError
from pathgrad.oracle.reference import beta_dz_dalpha_reference
from pathgrad.shape_grad.gamma import stirling_factor
from pathgrad.shape_grad.regions import FormulaKind, Region, RegionedApprox
from pathgrad.shape_grad.registry import get_registry

Array = NDArray[np.float64]

TAYLOR_TERMS = 10
TAYLOR_XI_LIMIT = 2.5
MIRROR_XI_LIMIT = 0.75
LR_MIN_SHAPE = 6.0
LR_NEAR_WIDTH = 0.1  # ε, in standard deviations


def _xi(z: Array, alpha: Array, beta: Array) -> Array:
    return z * (1.0 - z) * (alpha + beta)


def _taylor(z: Array, alpha: Array, beta: Array) -> Array:
    # z(1−z)^(1−β) Σ c_n z^n/(α+n)·[ψ(α) − ψ(α+β) − log z + 1/(α+n)], c_n = (1−β)_n/n!
    digamma_gap = special.psi(alpha) - special.psi(alpha + beta)
    log_z = np.log(z)
    total = np.zeros_like(z)
    coeff = np.ones_like(z)
    power = np.ones_like(z)
    for n in range(TAYLOR_TERMS):
        if n:
            coeff = coeff * (n - beta) / n
            power = power * z
        inv = 1.0 / (alpha + n)
        total += coeff * power * inv * (digamma_gap - log_z + inv)
    return z * np.exp((1.0 - beta) * np.log1p(-z)) * total


def _dx_dsecond_series(x: Array, a: Array, b: Array) -> Array:
    """Taylor series in x of dx/db for x ~ Beta(a, b)."""
    digamma_gap = special.psi(a + b) - special.psi(b)
    total = np.zeros_like(x)
    coeff = np.ones_like(x)
    dcoeff = np.zeros_like(x)
    power = np.ones_like(x)
    for n in range(TAYLOR_TERMS):
        if n:
            # c_n = c_{n-1}(n − b)/n, and its b-derivative
            dcoeff = (dcoeff * (n - b) - coeff) / n
            coeff = coeff * (n - b) / n
            power = power * x
        total += (dcoeff + digamma_gap * coeff) * power / (a + n)
    return -x * np.exp((1.0 - b) * np.log1p(-x)) * total


def _taylor_mirror(z: Array, alpha: Array, beta: Array) -> Array:
    # 1 − z ~ Beta(β, α), and α is its second parameter
    return -_dx_dsecond_series(1.0 - z, beta, alpha)


def _std(alpha: Array, beta: Array) -> Array:
    total = alpha + beta
    return np.sqrt(alpha * beta) / (total * np.sqrt(total + 1.0))


def _lr_near(z: Array, alpha: Array, beta: Array) -> Array:
    """Expansion of the far form in powers of z − α/(α+β)."""
    a, b = alpha, beta
    h = 8.0 * a**4 * (135.0 * b - 11.0) * (1.0 - z)
    i = a**3 * b * (453.0 - 455.0 * z + 1620.0 * b * (1.0 - z))
    j = 3.0 * a**2 * b**2 * (180.0 * b - 90.0 * z + 59.0)
    k = a * b**3 * (20.0 * z * (27.0 * b + 16.0) + 43.0) + 47.0 * b**4 * z
    numerator = (12.0 * a + 1.0) * (12.0 * b + 1.0) * (h + i + j + k)
    denominator = 12960.0 * a**3 * b**2 * (a + b) ** 2 * (12.0 * a + 12.0 * b + 1.0)
    return numerator / denominator


def _lr_far(z: Array, alpha: Array, beta: Array) -> Array:
    """−∂F/∂α over the Stirling density, F the Lugannani-Rice CDF of (1−z)X − zY.

    With X ~ Gamma(α), Y ~ Gamma(β) and t = α + β the saddlepoint gives
    w² = 2D, D = α log(α/(tz)) + β log(β/(t(1−z))), and u = (tz − α)·√(t/(αβ)).
    """
    a, b = alpha, beta
    total = a + b
    sign = np.where(z < a / total, -1.0, 1.0)
    gap = a * (1.0 - z) - b * z
    root = np.sqrt(2.0 * a * b / total)
    big_a = b * (2.0 * a**2 * (1.0 - z) + a * b * (1.0 - z) + b**2 * z) / (
        np.sqrt(2.0 * a * b) * total**1.5 * gap**2
    )
    # D ≥ 0 and vanishes only at the mean, which lr_near covers
    divergence = a * np.log(a / (total * z)) + b * np.log(b / (total * (1.0 - z)))
    big_b = root / gap + sign * 0.5 * divergence**-1.5
    stirling = stirling_factor(a) * stirling_factor(b) / stirling_factor(total)
    return z * (1.0 - z) * (big_a + np.log(a / (z * total)) * big_b) * stirling / root


def _rational(z: Array, alpha: Array, beta: Array) -> Array:
    registry = get_registry()
    surface = registry.surface("beta")
    if surface is None:
        if registry.fallback == "error":
            raise CoefficientFileError("Beta rational surface not loaded")
        registry.warn_fallback("beta")
        return np.asarray(beta_dz_dalpha_reference(z, alpha, beta), dtype=float)
    return surface.evaluate(z, alpha, beta)


def _lr_applies(z: Array, a: Array, b: Array) -> Array:
    return (a > LR_MIN_SHAPE) & (b > LR_MIN_SHAPE)


BETA_DZ_DALPHA = RegionedApprox(
    "beta_dz_dalpha",
    [
        Region(
            "taylor",
            FormulaKind.TAYLOR,
            lambda z, a, b: (z <= 0.5) & (_xi(z, a, b) < TAYLOR_XI_LIMIT),
            _taylor,
        ),
        Region(
            "taylor_mirror",
            FormulaKind.TAYLOR,
            lambda z, a, b: (z >= 0.5) & (_xi(z, a, b) < MIRROR_XI_LIMIT),
            _taylor_mirror,
        ),
        Region(
            "lr_near",
            FormulaKind.LR_NEAR,
            lambda z, a, b: _lr_applies(z, a, b) & (np.abs(z - a / (a + b)) <= LR_NEAR_WIDTH * _std(a, b)),
            _lr_near,
        ),
        Region("lr_far", FormulaKind.LR_FAR, _lr_applies, _lr_far),
        Region("rational", FormulaKind.RATIONAL, lambda z, a, b: np.ones(z.shape, dtype=bool), _rational),
    ],
)


def _validate(z: Array, alpha: Array, beta: Array) -> None:
    if np.any(np.isnan(z)) or np.any((z <= 0) | (z >= 1)):
        raise DomainError("Beta derivatives require z in (0, 1)")
    if np.any(np.isnan(alpha)) or np.any(alpha <= 0) or np.any(np.isnan(beta)) or np.any(beta <= 0):
        raise DomainError("Beta shape parameters must be positive")


def _broadcast(z: ArrayLike, alpha: ArrayLike, beta: ArrayLike) -> tuple[Array, Array, Array, bool]:
    z_arr, a_arr, b_arr = np.broadcast_arrays(
        np.asarray(z, dtype=float), np.asarray(alpha, dtype=float), np.asarray(beta, dtype=float)
    )
    _validate(z_arr, a_arr, b_arr)
    scalar = all(np.ndim(v) == 0 for v in (z, alpha, beta))
    return z_arr, a_arr, b_arr, scalar


def beta_dz_dalpha(z: ArrayLike, alpha: ArrayLike, beta: ArrayLike) -> Any:
    """dz/dα for z ~ Beta(α, β).

    Raises:
        DomainError: If z ∉ (0, 1) or a shape parameter is nonpositive
    """
    z_arr, a_arr, b_arr, scalar = _broadcast(z, alpha, beta)
    out = BETA_DZ_DALPHA.evaluate(z_arr, a_arr, b_arr)
    return out.item() if scalar else out


def beta_dz_dbeta(z: ArrayLike, alpha: ArrayLike, beta: ArrayLike) -> Any:
    """dz/dβ for z ~ Beta(α, β), exactly −dz/dα(1 − z; β, α)."""
    z_arr, a_arr, b_arr, scalar = _broadcast(z, alpha, beta)
    out = -BETA_DZ_DALPHA.evaluate(1.0 - z_arr, b_arr, a_arr)
    return out.item() if scalar else out


def beta_region_ids(z: ArrayLike, alpha: ArrayLike, beta: ArrayLike) -> Any:
    """Region id used by beta_dz_dalpha for each point."""
    labels = BETA_DZ_DALPHA.labels(z, alpha, beta)
    return labels.item() if labels.ndim == 0 else labels
