"""Transport-equation residual checker.

For a density q_θ and velocity field v^θ the log form of the continuity
equation reads

    ∂θ log q + ∇·v + v·∇log q = 0

Every derivative here is a central finite difference with step
``step·max(|x|, 1)``, so the check never relies on the Jacobians of the
fields it audits.
"""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from pathgrad.config import get_config
from pathgrad.core.exceptions import DomainError, SimplexError
from pathgrad.core.specfun import log_gamma
from pathgrad.mvn.cholesky import CholeskyFactor
from pathgrad.mvn.velocity import VelocityKind, mu_field, velocity_field
from pathgrad.shape_grad.dirichlet import FactorSource, dirichlet_dz_dalpha
from pathgrad.univariate.base import ScalarDistribution

logger = logging.getLogger(__name__)

Array = NDArray[np.float64]
LogDensity = Callable[[float, Array], Array]
Velocity = Callable[[Array], Array]


@dataclass(frozen=True)
class TransportReport:
    """Absolute log-form residuals over a grid of points."""

    max_residual: float
    mean_residual: float
    n_points: int
    residuals: Array = field(repr=False)

    def passed(self, tolerance: float) -> bool:
        return self.max_residual <= tolerance


def _default_step() -> float:
    return float(get_config().get("transport", "step", default=1e-5))


def transport_residual(
    log_density: LogDensity,
    theta: float,
    velocity: Velocity,
    points: ArrayLike,
    step: float | None = None,
    dlogq_dtheta: Callable[[Array], Array] | None = None,
) -> TransportReport:
    """Evaluate |∂θ log q + ∇·v + v·∇log q| at each point.

    Args:
        log_density: (θ, z) ↦ log q_θ(z) for z of shape (n, D)
        theta: Parameter value
        velocity: z ↦ v(z), shape (n, D)
        points: Grid, shape (n, D) or (n,) for scalar samples
        step: Relative FD step (default from config)
        dlogq_dtheta: Analytic ∂θ log q, if available

    Raises:
        DomainError: If the log density is not finite on the grid
    """
    step = _default_step() if step is None else step
    z = np.asarray(points, dtype=float)
    if z.ndim == 1:
        z = z[:, None]
    n, d = z.shape

    base = np.asarray(log_density(theta, z), dtype=float)
    if not np.all(np.isfinite(base)):
        raise DomainError("Transport grid lies outside the support")

    if dlogq_dtheta is not None:
        d_theta = np.asarray(dlogq_dtheta(z), dtype=float)
    else:
        h = step * max(abs(theta), 1.0)
        d_theta = (np.asarray(log_density(theta + h, z)) - np.asarray(log_density(theta - h, z))) / (2.0 * h)

    v = np.asarray(velocity(z), dtype=float).reshape(n, d)
    divergence = np.zeros(n)
    advection = np.zeros(n)
    for k in range(d):
        hk = step * np.maximum(np.abs(z[:, k]), 1.0)
        shift = np.zeros_like(z)
        shift[:, k] = hk
        v_plus = np.asarray(velocity(z + shift), dtype=float).reshape(n, d)[:, k]
        v_minus = np.asarray(velocity(z - shift), dtype=float).reshape(n, d)[:, k]
        divergence += (v_plus - v_minus) / (2.0 * hk)
        grad_k = (np.asarray(log_density(theta, z + shift)) - np.asarray(log_density(theta, z - shift))) / (2.0 * hk)
        advection += v[:, k] * grad_k

    residuals = np.abs(d_theta + divergence + advection)
    report = TransportReport(float(residuals.max()), float(residuals.mean()), n, residuals)
    logger.debug("Transport residual: max %.3g, mean %.3g over %d points", report.max_residual, report.mean_residual, n)
    return report


# =============================================================================
# Helpers per distribution family
# =============================================================================


def univariate_transport_residual(
    dist: ScalarDistribution,
    index: int | str,
    points: ArrayLike | None = None,
    n_points: int | None = None,
    step: float | None = None,
) -> TransportReport:
    """Residual of the master-formula field of a univariate family.

    The default grid is the quantiles of an even grid in (0.02, 0.98).
    """
    i = dist.param_index(index)
    if points is None:
        n_points = n_points or int(get_config().get("transport", "points", default=200))
        points = np.asarray(dist.ppf(np.linspace(0.02, 0.98, n_points)), dtype=float)
    z = np.asarray(points, dtype=float).reshape(-1)
    if not np.all(dist.in_support(z)):
        raise DomainError("Transport grid lies outside the support")

    def log_density(theta: float, pts: Array) -> Array:
        return np.asarray(dist.with_param(i, theta).logpdf(pts[:, 0]), dtype=float)

    def velocity(pts: Array) -> Array:
        return np.asarray(dist.dz_dtheta(pts[:, 0], i), dtype=float)[:, None]

    return transport_residual(log_density, float(dist.theta[i]), velocity, z, step)


def mvn_transport_residual(
    factor: CholeskyFactor,
    selector: tuple[int, ...],
    kind: VelocityKind | str = VelocityKind.OMT,
    points: ArrayLike | None = None,
    mean: ArrayLike | None = None,
    rotation: ArrayLike | None = None,
    n_points: int | None = None,
    seed: int = 0,
    step: float | None = None,
) -> TransportReport:
    """Residual of an MVN field; ``selector`` is (a, b) for L_ab or (a,) for μ_a."""
    d = factor.dimension
    mu = np.zeros(d) if mean is None else np.asarray(mean, dtype=float)
    if points is None:
        n_points = n_points or int(get_config().get("transport", "points", default=200))
        points, _ = factor.sample(np.random.default_rng(seed), n_points, mu)

    if len(selector) == 1:
        (a,) = selector
        field_ = mu_field(a, d)
        theta = float(mu[a])

        def log_density(t: float, pts: Array) -> Array:
            shifted = mu.copy()
            shifted[a] = t
            return factor.logpdf(pts, shifted)

    elif len(selector) == 2:
        a, b = selector
        field_ = velocity_field(kind, factor, a, b, mu, rotation)
        theta = float(factor.matrix[a, b])

        def log_density(t: float, pts: Array) -> Array:
            return factor.with_entry(a, b, t).logpdf(pts, mu)

    else:
        raise DomainError(f"Selector must be (a,) or (a, b), got {selector}")

    return transport_residual(log_density, theta, field_, points, step)


def dirichlet_transport_residual(
    alpha: ArrayLike,
    j: int,
    points: ArrayLike | None = None,
    drop: int | None = None,
    factor: FactorSource = "approx",
    n_points: int | None = None,
    seed: int = 0,
    step: float | None = None,
) -> TransportReport:
    """Residual of the Dirichlet field for α_j in the coordinates z without component ``drop``.

    ``drop`` defaults to ``j``; the dropped component is 1 − Σ(others).

    Raises:
        SimplexError: If a grid point is off the simplex
    """
    a = np.asarray(alpha, dtype=float)
    k = a.shape[0]
    drop = j if drop is None else drop
    if not (0 <= j < k and 0 <= drop < k):
        raise DomainError(f"Component index out of range for n={k}")
    if points is None:
        n_points = n_points or int(get_config().get("transport", "points", default=200))
        points = np.random.default_rng(seed).dirichlet(a, n_points)
    z = np.asarray(points, dtype=float)
    if np.any(z <= 0) or np.any(np.abs(z.sum(axis=-1) - 1.0) > 1e-12):
        raise SimplexError("Transport grid must lie in the open simplex")
    keep = [i for i in range(k) if i != drop]

    def full(y: Array) -> Array:
        out = np.empty((y.shape[0], k))
        out[:, keep] = y
        out[:, drop] = 1.0 - y.sum(axis=-1)
        return out

    def log_density(t: float, y: Array) -> Array:
        conc = a.copy()
        conc[j] = t
        zz = full(y)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.sum((conc - 1.0) * np.log(zz), axis=-1) - _log_multibeta(conc)

    def velocity(y: Array) -> Array:
        return dirichlet_dz_dalpha(full(y), a, j, factor)[:, keep]

    return transport_residual(log_density, float(a[j]), velocity, z[:, keep], step)


def _log_multibeta(alpha: Array) -> float:
    return float(np.sum(log_gamma(alpha)) - log_gamma(alpha.sum()))
