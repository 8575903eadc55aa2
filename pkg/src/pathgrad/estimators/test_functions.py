"""Library of test functions with analytic gradients and closed-form expectations."""

from __future__ import annotations

from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray

from pathgrad.core.exceptions import DomainError
from pathgrad.core.specfun import trigamma
from pathgrad.estimators.models import TestFunction

Array = NDArray[np.float64]


def constant(value: float = 1.0) -> TestFunction:
    return TestFunction(
        name="constant",
        value=lambda z: np.full(np.shape(z)[:1], value, dtype=float),
        gradient=lambda z: np.zeros_like(np.asarray(z, dtype=float)),
    )


def power(k: int) -> TestFunction:
    """f(z) = z^k for scalar samples."""
    if k < 1:
        raise DomainError("Power test functions need k ≥ 1")
    return TestFunction(
        name=f"z^{k}",
        value=lambda z: np.asarray(z, dtype=float) ** k,
        gradient=lambda z: k * np.asarray(z, dtype=float) ** (k - 1),
    )


def cosine() -> TestFunction:
    """f(z) = cos z for scalar samples."""
    return TestFunction(
        name="cos",
        value=lambda z: np.cos(np.asarray(z, dtype=float)),
        gradient=lambda z: -np.sin(np.asarray(z, dtype=float)),
    )


def component_power(index: int, k: int) -> TestFunction:
    """f(z) = z_index^k for vector samples."""

    def gradient(z: Array) -> Array:
        z = np.asarray(z, dtype=float)
        out = np.zeros_like(z)
        out[..., index] = k * z[..., index] ** (k - 1)
        return out

    return TestFunction(
        name=f"z{index}^{k}",
        value=lambda z: np.asarray(z, dtype=float)[..., index] ** k,
        gradient=gradient,
    )


def beta_cubic_exact(alpha: float) -> float:
    """d/dα E[z³] for z ~ Beta(α, α), where E[z³] = (α + 2)/(4(2α + 1))."""
    return -3.0 / (4.0 * (2.0 * alpha + 1.0) ** 2)


# =============================================================================
# Multivariate test functions and exact gradients for z ~ N(0, LLᵀ)
# =============================================================================


def _mvn_exact(source: Any, cholesky_gradient: Array, mean_gradient: Array) -> Array:
    values = np.array([cholesky_gradient[a, b] for a, b in source.entries])
    return np.concatenate([mean_gradient, values]) if source.include_mean else values


def _require_zero_mean(source: Any) -> None:
    if np.any(source.mean != 0):
        raise DomainError("Closed-form MVN gradients here assume a zero mean")


def linear(kappa: ArrayLike) -> TestFunction:
    """f(z) = κᵀz; ∇_L E[f] = 0, ∇_μ E[f] = κ."""
    k = np.asarray(kappa, dtype=float)

    def exact(source: Any) -> Array:
        return _mvn_exact(source, np.zeros((k.size, k.size)), k)

    return TestFunction(
        name="linear",
        value=lambda z: np.asarray(z, dtype=float) @ k,
        gradient=lambda z: np.broadcast_to(k, np.shape(z)).copy(),
        exact_gradient=exact,
    )


def quadratic(q: ArrayLike) -> TestFunction:
    """f(z) = zᵀQz with Q symmetric; ∇_L E[f] = 2QL."""
    qm = np.asarray(q, dtype=float)

    def exact(source: Any) -> Array:
        _require_zero_mean(source)
        return _mvn_exact(source, 2.0 * qm @ source.factor.matrix, np.zeros(qm.shape[0]))

    return TestFunction(
        name="quadratic",
        value=lambda z: np.einsum("...i,ij,...j->...", z, qm, z),
        gradient=lambda z: 2.0 * np.asarray(z, dtype=float) @ qm,
        exact_gradient=exact,
    )


def quartic(q: ArrayLike) -> TestFunction:
    """f(z) = (zᵀQz)²; ∇_L E[f] = 4tr(QΣ)QL + 8QΣQL."""
    qm = np.asarray(q, dtype=float)

    def exact(source: Any) -> Array:
        _require_zero_mean(source)
        lm = source.factor.matrix
        sigma = source.factor.covariance
        grad = 4.0 * np.trace(qm @ sigma) * qm @ lm + 8.0 * qm @ sigma @ qm @ lm
        return _mvn_exact(source, grad, np.zeros(qm.shape[0]))

    def gradient(z: Array) -> Array:
        form = np.einsum("...i,ij,...j->...", z, qm, z)
        return 4.0 * form[..., None] * (np.asarray(z, dtype=float) @ qm)

    return TestFunction(
        name="quartic",
        value=lambda z: np.einsum("...i,ij,...j->...", z, qm, z) ** 2,
        gradient=gradient,
        exact_gradient=exact,
    )


def mvn_cosine(w: ArrayLike) -> TestFunction:
    """f(z) = cos(wᵀz); ∇_L E[f] = −exp(−½wᵀΣw)·wwᵀL."""
    wv = np.asarray(w, dtype=float)

    def exact(source: Any) -> Array:
        _require_zero_mean(source)
        decay = np.exp(-0.5 * wv @ source.factor.covariance @ wv)
        return _mvn_exact(source, -decay * np.outer(wv, wv) @ source.factor.matrix, np.zeros(wv.size))

    return TestFunction(
        name="cos",
        value=lambda z: np.cos(np.asarray(z, dtype=float) @ wv),
        gradient=lambda z: -np.sin(np.asarray(z, dtype=float) @ wv)[..., None] * wv,
        exact_gradient=exact,
    )


# =============================================================================
# Dirichlet
# =============================================================================


def dirichlet_log_joint(counts: ArrayLike, prior: float) -> TestFunction:
    """log p(x, z) for x ~ Multinomial(z), z ~ Dir(prior·1), up to a constant.

    f(z) = Σ_k (x_k + prior − 1)·log z_k. Paired with
    ``dirichlet_entropy_gradient`` this is the ELBO in analytic-entropy form.
    """
    c = np.asarray(counts, dtype=float) + prior - 1.0
    return TestFunction(
        name="log-joint",
        value=lambda z: np.log(np.asarray(z, dtype=float)) @ c,
        gradient=lambda z: c / np.asarray(z, dtype=float),
    )


def dirichlet_entropy_gradient(alpha: ArrayLike) -> Array:
    """∂H[Dir(α)]/∂α_j = (α_tot − K)ψ'(α_tot) − (α_j − 1)ψ'(α_j)."""
    a = np.asarray(alpha, dtype=float)
    total = a.sum()
    return (total - a.size) * trigamma(total) - (a - 1.0) * trigamma(a)
