"""Lugannani-Rice saddlepoint approximation of a CDF from its cumulant generating function."""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass

from scipy import optimize

from pathgrad.core.constants import SQRT_2PI
from pathgrad.core.exceptions import ConvergenceError, DomainError
from pathgrad.core.specfun import std_normal_cdf, std_normal_pdf

logger = logging.getLogger(__name__)

SINGULAR_WIDTH = 1e-6
MAX_BRACKET_EXPANSIONS = 200

ScalarFn = Callable[[float], float]


@dataclass(frozen=True)
class CGF:
    """K(s) = log E[e^{sz}] and its first three derivatives.

    Attributes:
        k0, k1, k2, k3: K, K', K'', K'''
        domain: Open interval of s where K is finite
    """

    k0: ScalarFn
    k1: ScalarFn
    k2: ScalarFn
    k3: ScalarFn
    domain: tuple[float, float] = (-math.inf, math.inf)

    @property
    def mean(self) -> float:
        return self.k1(0.0)

    @property
    def scale(self) -> float:
        return math.sqrt(self.k2(0.0))


def normal_cgf(mu: float, sigma: float) -> CGF:
    """K(s) = μs + σ²s²/2."""
    if sigma <= 0:
        raise DomainError("sigma must be positive")
    var = sigma * sigma
    return CGF(
        k0=lambda s: mu * s + 0.5 * var * s * s,
        k1=lambda s: mu + var * s,
        k2=lambda s: var,
        k3=lambda s: 0.0,
    )


def gamma_cgf(alpha: float, rate: float = 1.0) -> CGF:
    """K(s) = −α·log(1 − s/β) for s < β."""
    if alpha <= 0 or rate <= 0:
        raise DomainError("Gamma CGF needs positive shape and rate")
    return CGF(
        k0=lambda s: -alpha * math.log1p(-s / rate),
        k1=lambda s: alpha / (rate - s),
        k2=lambda s: alpha / (rate - s) ** 2,
        k3=lambda s: 2.0 * alpha / (rate - s) ** 3,
        domain=(-math.inf, rate),
    )


def _inside(cgf: CGF, s: float) -> bool:
    low, high = cgf.domain
    return low < s < high


def solve_saddlepoint(cgf: CGF, z: float) -> float:
    """Root ŝ of K'(ŝ) = z.

    Newton from s = 0 first; if it leaves the domain or fails, a bracket
    is grown inside the domain and ``brentq`` finishes.

    Raises:
        ConvergenceError: If no root is found
    """
    try:
        result = optimize.root_scalar(
            lambda s: cgf.k1(s) - z, fprime=cgf.k2, x0=0.0, method="newton", maxiter=100
        )
        if result.converged and _inside(cgf, result.root) and math.isfinite(result.root):
            return float(result.root)
    except (ArithmeticError, ValueError, RuntimeError):
        pass
    logger.debug("Newton left the CGF domain at z=%g; falling back to brentq", z)

    low, high = cgf.domain
    # K' is increasing: grow the side that brackets z
    if z > cgf.mean:
        lo, hi = 0.0, 1.0 if math.isinf(high) else 0.5 * high
        for _ in range(MAX_BRACKET_EXPANSIONS):
            if cgf.k1(hi) >= z:
                break
            lo, hi = hi, (2.0 * hi if math.isinf(high) else 0.5 * (hi + high))
        else:
            raise ConvergenceError(f"Could not bracket the saddlepoint for z={z}")
    else:
        lo, hi = -1.0 if math.isinf(low) else 0.5 * low, 0.0
        for _ in range(MAX_BRACKET_EXPANSIONS):
            if cgf.k1(lo) <= z:
                break
            hi, lo = lo, (2.0 * lo if math.isinf(low) else 0.5 * (lo + low))
        else:
            raise ConvergenceError(f"Could not bracket the saddlepoint for z={z}")
    try:
        return float(optimize.brentq(lambda s: cgf.k1(s) - z, lo, hi, xtol=1e-14, maxiter=500))
    except (RuntimeError, ValueError) as e:
        raise ConvergenceError(f"Saddlepoint solve failed for z={z}", cause=e) from e


def lugannani_rice_cdf(cgf: CGF, z: float, mean: float | None = None) -> float:
    """Saddlepoint CDF approximation Φ(ŵ) + φ(ŵ)(1/ŵ − 1/û).

    ŵ = sign(ŝ)·sqrt(2(ŝz − K(ŝ))) and û = ŝ·sqrt(K''(ŝ)). Within
    1e-6·sqrt(K''(0)) of the mean the removable singularity is replaced by
    ½ + K'''(0)/(6·sqrt(2π)·K''(0)^{3/2}).

    Raises:
        ConvergenceError: If the saddlepoint equation cannot be solved
    """
    mean = cgf.mean if mean is None else mean
    scale = cgf.scale
    if abs(z - mean) <= SINGULAR_WIDTH * scale:
        return 0.5 + cgf.k3(0.0) / (6.0 * SQRT_2PI * cgf.k2(0.0) ** 1.5)

    s_hat = solve_saddlepoint(cgf, z)
    w_sq = 2.0 * (s_hat * z - cgf.k0(s_hat))
    w_hat = math.copysign(math.sqrt(max(w_sq, 0.0)), s_hat)
    u_hat = s_hat * math.sqrt(cgf.k2(s_hat))
    if w_hat == 0.0 or u_hat == 0.0:
        return 0.5 + cgf.k3(0.0) / (6.0 * SQRT_2PI * cgf.k2(0.0) ** 1.5)
    return float(std_normal_cdf(w_hat) + std_normal_pdf(w_hat) * (1.0 / w_hat - 1.0 / u_hat))
