"""Velocity fields for z = μ + L·z̃ with Cholesky factor L.

Every field here is affine, v(z) = M·z + c. For an entry L_ab (a ≥ b) with
p = L⁻ᵀe_b (row b of L⁻¹), q = P·e_a, r = P·p and P = Σ⁻¹:

    RT           M = e_a·pᵀ
    OMT          M = ½(e_a·pᵀ + p·e_aᵀ) + S,  P·S + S·P = ½(p·qᵀ + q·pᵀ − e_a·rᵀ − r·e_aᵀ)
    OMT-whitened M = L·M̃·L⁻¹,  M̃ = ½(c·e_bᵀ + e_b·cᵀ),  c = L⁻¹e_a
    RT+rotation  M = e_a·pᵀ + L·A·L⁻¹,  A antisymmetric

All of them satisfy tr M = L⁻¹_ba and sym(P·M) = sym(q·pᵀ), which is the
transport equation for a linear field.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray

from pathgrad.core.exceptions import AsymmetryError, DomainError
from pathgrad.mvn.cholesky import CholeskyFactor
from pathgrad.mvn.linalg import solve_symmetric_sylvester

logger = logging.getLogger(__name__)

Array = NDArray[np.float64]

ANTISYMMETRY_TOLERANCE = 1e-12


class VelocityKind(str, Enum):
    """Family of transport solution."""
    RT = "rt"
    OMT = "omt"
    OMT_WHITENED = "omt-whitened"
    RT_ROTATION = "rt-rotation"


@dataclass(frozen=True)
class VelocityField:
    """Affine velocity field v(z) = M·z + c for one parameter.

    Attributes:
        kind: Construction used
        selector: ("mu", a) or ("L", a, b)
        matrix: M
        offset: c
    """

    kind: VelocityKind
    selector: tuple[Any, ...]
    matrix: Array = field(repr=False)
    offset: Array = field(repr=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        c = np.asarray(self.offset, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or c.shape != (m.shape[0],):
            raise ValueError("VelocityField needs a square matrix and a matching offset")
        m.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "offset", c)

    @property
    def dimension(self) -> int:
        return int(self.offset.shape[0])

    def __call__(self, z: ArrayLike) -> Array:
        """v(z) for z of shape (..., D)."""
        return np.asarray(z, dtype=float) @ self.matrix.T + self.offset

    def jacobian(self) -> Array:
        """∂v_i/∂z_j."""
        return self.matrix

    def divergence(self) -> float:
        return float(np.trace(self.matrix))

    def asymmetry(self) -> float:
        """max |∂v_i/∂z_j − ∂v_j/∂z_i|."""
        return float(np.max(np.abs(self.matrix - self.matrix.T)))


# =============================================================================
# Index helpers
# =============================================================================


def _check_entry(factor: CholeskyFactor, a: int, b: int) -> None:
    d = factor.dimension
    if not (0 <= b <= a < d):
        raise DomainError(f"({a}, {b}) is not a lower-triangular index for D={d}")


def _unit(dimension: int, index: int) -> Array:
    e = np.zeros(dimension)
    e[index] = 1.0
    return e


def _row_of_inverse(factor: CholeskyFactor, b: int) -> Array:
    # p = L⁻ᵀe_b by triangular solve
    return factor.solve_transpose(_unit(factor.dimension, b))


def _centered(z: ArrayLike, mean: ArrayLike | None) -> Array:
    z_arr = np.asarray(z, dtype=float)
    return z_arr if mean is None else z_arr - np.asarray(mean, dtype=float)


def _offset(matrix: Array, mean: ArrayLike | None) -> Array:
    if mean is None:
        return np.zeros(matrix.shape[0])
    return -matrix @ np.asarray(mean, dtype=float)


def check_antisymmetric(generator: ArrayLike) -> Array:
    """Validate a rotation generator.

    Raises:
        AsymmetryError: If A + Aᵀ exceeds 1e-12 anywhere
    """
    a = np.asarray(generator, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError(f"Rotation generator must be square, got shape {a.shape}")
    if a.size and np.max(np.abs(a + a.T)) > ANTISYMMETRY_TOLERANCE:
        raise AsymmetryError("Rotation generator is not antisymmetric within 1e-12")
    return a


def random_antisymmetric(dimension: int, rng: np.random.Generator, scale: float = 1.0) -> Array:
    """A = scale·(B − Bᵀ)/2 with B standard Normal."""
    b = rng.standard_normal((dimension, dimension))
    return scale * 0.5 * (b - b.T)


# =============================================================================
# Field matrices
# =============================================================================


def rt_matrix(factor: CholeskyFactor, a: int, b: int) -> Array:
    _check_entry(factor, a, b)
    return np.outer(_unit(factor.dimension, a), _row_of_inverse(factor, b))


def omt_sylvester_term(factor: CholeskyFactor, a: int, b: int) -> Array:
    """S^{ab} with P·S + S·P = Ξ^{ab}, built from vectors only."""
    _check_entry(factor, a, b)
    prec = factor.precision
    e_a = _unit(factor.dimension, a)
    p = _row_of_inverse(factor, b)
    q = prec[:, a]
    r = prec @ p
    xi = 0.5 * (np.outer(p, q) + np.outer(q, p) - np.outer(e_a, r) - np.outer(r, e_a))
    return solve_symmetric_sylvester(factor.eig, xi)


def omt_matrix(factor: CholeskyFactor, a: int, b: int) -> Array:
    rt = rt_matrix(factor, a, b)
    return 0.5 * (rt + rt.T) + omt_sylvester_term(factor, a, b)


def omt_whitened_matrix(factor: CholeskyFactor, a: int, b: int) -> Array:
    """M̃ = ½(c·e_bᵀ + e_b·cᵀ) in whitened coordinates, c = L⁻¹e_a."""
    _check_entry(factor, a, b)
    c = factor.inverse[:, a]
    e_b = _unit(factor.dimension, b)
    return 0.5 * (np.outer(c, e_b) + np.outer(e_b, c))


# =============================================================================
# Point evaluations
# =============================================================================


def rt_velocity(factor: CholeskyFactor, z: ArrayLike, a: int, b: int, mean: ArrayLike | None = None) -> Array:
    """v_i = δ_ia·(L⁻¹(z − μ))_b, by triangular solve.

    Raises:
        DomainError: For an index above the diagonal
    """
    _check_entry(factor, a, b)
    w = factor.solve(_centered(z, mean))
    out = np.zeros_like(w)
    out[..., a] = w[..., b]
    return out


def omt_velocity(factor: CholeskyFactor, z: ArrayLike, a: int, b: int, mean: ArrayLike | None = None) -> Array:
    """v = ½(e_a·(pᵀz) + p·z_a) + S^{ab}·z with z centered at μ.

    Raises:
        DomainError: For an index above the diagonal
        SingularCholeskyError: If the precision matrix is ill-conditioned
    """
    _check_entry(factor, a, b)
    zc = _centered(z, mean)
    p = _row_of_inverse(factor, b)
    sym = 0.5 * (np.outer(_unit(factor.dimension, a), p) + np.outer(p, _unit(factor.dimension, a)))
    return zc @ (sym + omt_sylvester_term(factor, a, b)).T


def omt_velocity_whitened(factor: CholeskyFactor, z_tilde: ArrayLike, a: int, b: int) -> Array:
    """ṽ = ½(L⁻¹_{:,a}·z̃_b + e_b·Σ_k L⁻¹_{ka} z̃_k), a gradient of ½(cᵀz̃)z̃_b."""
    return np.asarray(z_tilde, dtype=float) @ omt_whitened_matrix(factor, a, b).T


def whitened_potential(factor: CholeskyFactor, z_tilde: ArrayLike, a: int, b: int) -> Array:
    """T̃^{ab}(z̃) = ½(L⁻ᵀz̃)_a·z̃_b, the potential of the whitened OMT field."""
    _check_entry(factor, a, b)
    zt = np.asarray(z_tilde, dtype=float)
    return 0.5 * (zt @ factor.inverse[:, a]) * zt[..., b]


def rotation_control_variate(generator: ArrayLike, z_tilde: ArrayLike) -> Array:
    """w̃ = A·z̃; zero-mean against any smooth test function.

    Raises:
        AsymmetryError: If A is not antisymmetric
    """
    a = check_antisymmetric(generator)
    return np.asarray(z_tilde, dtype=float) @ a.T


def mu_velocity(a: int, dimension: int) -> Array:
    """Constant field e_a for the location μ_a."""
    if not 0 <= a < dimension:
        raise DomainError(f"Index {a} out of range for D={dimension}")
    return _unit(dimension, a)


# =============================================================================
# Field objects
# =============================================================================


def mu_field(a: int, dimension: int) -> VelocityField:
    return VelocityField(VelocityKind.RT, ("mu", a), np.zeros((dimension, dimension)), mu_velocity(a, dimension))


def velocity_field(
    kind: VelocityKind | str,
    factor: CholeskyFactor,
    a: int,
    b: int,
    mean: ArrayLike | None = None,
    rotation: ArrayLike | None = None,
) -> VelocityField:
    """Field for L_ab in natural coordinates.

    Raises:
        AsymmetryError: If an RT+rotation generator is not antisymmetric
        DomainError: For invalid indices or a missing rotation generator
    """
    kind = VelocityKind(kind)
    if kind is VelocityKind.RT:
        matrix = rt_matrix(factor, a, b)
    elif kind is VelocityKind.OMT:
        matrix = omt_matrix(factor, a, b)
    elif kind is VelocityKind.OMT_WHITENED:
        matrix = factor.matrix @ omt_whitened_matrix(factor, a, b) @ factor.inverse
    else:
        if rotation is None:
            raise DomainError("RT+rotation field needs a rotation generator")
        generator = check_antisymmetric(rotation)
        matrix = rt_matrix(factor, a, b) + factor.matrix @ generator @ factor.inverse
    return VelocityField(kind, ("L", a, b), matrix, _offset(matrix, mean))


def kinetic_energy(field_: VelocityField, factor: CholeskyFactor, mean: ArrayLike | None = None) -> float:
    """½E‖v(z)‖² = ½(tr(M·Σ·Mᵀ) + ‖M·μ + c‖²) for z ~ N(μ, Σ)."""
    m = field_.matrix
    centre = field_.offset + (0.0 if mean is None else m @ np.asarray(mean, dtype=float))
    return 0.5 * float(np.trace(m @ factor.covariance @ m.T) + centre @ centre)


def kinetic_energy_mc(
    field_: VelocityField,
    factor: CholeskyFactor,
    rng: np.random.Generator,
    n_samples: int,
    mean: ArrayLike | None = None,
) -> tuple[float, float]:
    """Monte Carlo ½E‖v‖² and its standard error."""
    z, _ = factor.sample(rng, n_samples, mean)
    energy = 0.5 * np.sum(field_(z) ** 2, axis=-1)
    return float(energy.mean()), float(energy.std(ddof=1) / np.sqrt(n_samples))


# =============================================================================
# Batched contractions over all lower entries
# =============================================================================


def lower_mask(dimension: int) -> NDArray[np.bool_]:
    return np.tril(np.ones((dimension, dimension), dtype=bool))


def rt_contraction(factor: CholeskyFactor, z: ArrayLike, grad: ArrayLike, mean: ArrayLike | None = None) -> Array:
    """∇f·v^{ab}_RT for every (a, b); shape (N, D, D), upper triangle zero."""
    w = factor.solve(_centered(z, mean))
    g = np.asarray(grad, dtype=float)
    return g[..., :, None] * w[..., None, :] * lower_mask(factor.dimension)


def omt_contraction(factor: CholeskyFactor, z: ArrayLike, grad: ArrayLike, mean: ArrayLike | None = None) -> Array:
    """∇f·v^{ab}_OMT for every (a, b) without forming per-entry fields.

    G = ½(g_a(L⁻¹z)_b + z_a(L⁻¹g)_b) + [(P·Ŵ − Ŵ·P)·L⁻ᵀ]_ab with
    Ŵ = U·sym(ĝẑᵀ ÷ (D_i + D_j))·Uᵀ, ĝ = Uᵀg, ẑ = Uᵀz.
    """
    zc = _centered(z, mean)
    g = np.asarray(grad, dtype=float)
    w_z = factor.solve(zc)
    w_g = factor.solve(g)
    sym_part = 0.5 * (g[..., :, None] * w_z[..., None, :] + zc[..., :, None] * w_g[..., None, :])

    eig = factor.eig
    u = eig.vectors
    denom = eig.values[:, None] + eig.values[None, :]
    g_hat = g @ u
    z_hat = zc @ u
    outer = g_hat[..., :, None] * z_hat[..., None, :]
    w_hat = u @ ((0.5 * (outer + np.swapaxes(outer, -1, -2))) / denom) @ u.T
    prec = factor.precision
    commutator = prec @ w_hat - w_hat @ prec
    s_part = commutator @ factor.inverse.T
    return (sym_part + s_part) * lower_mask(factor.dimension)


def rotation_contraction(
    factor: CholeskyFactor,
    z: ArrayLike,
    grad: ArrayLike,
    generator: ArrayLike,
    mean: ArrayLike | None = None,
) -> Array:
    """RT contraction plus ∇f·(L·A·L⁻¹(z − μ)) added to every entry."""
    a = check_antisymmetric(generator)
    zc = _centered(z, mean)
    g = np.asarray(grad, dtype=float)
    extra = np.sum(g * (factor.solve(zc) @ a.T @ factor.matrix.T), axis=-1)
    return rt_contraction(factor, z, grad, mean) + extra[..., None, None] * lower_mask(factor.dimension)


def cholesky_score(factor: CholeskyFactor, z: ArrayLike, mean: ArrayLike | None = None) -> Array:
    """∂ log q/∂L_ab = −L⁻¹_ba + (P(z − μ))_a·(L⁻¹(z − μ))_b, lower triangle."""
    zc = _centered(z, mean)
    w = factor.solve(zc)
    pz = factor.solve_transpose(w)
    return (pz[..., :, None] * w[..., None, :] - factor.inverse.T) * lower_mask(factor.dimension)


def mean_score(factor: CholeskyFactor, z: ArrayLike, mean: ArrayLike | None = None) -> Array:
    """∂ log q/∂μ = P(z − μ)."""
    return factor.solve_transpose(factor.solve(_centered(z, mean)))
