"""Symmetric eigendecomposition and the symmetric Sylvester solve."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg

from pathgrad.core.exceptions import ConvergenceError, DomainError

logger = logging.getLogger(__name__)

Array = NDArray[np.float64]

SYMMETRY_TOLERANCE = 1e-12
JACOBI_TOLERANCE = 1e-13
MAX_SWEEPS = 100


@dataclass(frozen=True)
class SymEig:
    """A = U·diag(D)·Uᵀ with orthogonal U and D sorted descending.

    Attributes:
        vectors: Orthogonal matrix U (eigenvectors in columns)
        values: Eigenvalues D, descending
        sweeps: Jacobi sweeps used (0 for LAPACK)
    """

    vectors: Array = field(repr=False)
    values: Array
    sweeps: int = 0

    def __post_init__(self):
        u = np.asarray(self.vectors, dtype=float)
        d = np.asarray(self.values, dtype=float)
        if u.ndim != 2 or u.shape[0] != u.shape[1] or d.shape != (u.shape[0],):
            raise ValueError("SymEig needs a square U and one eigenvalue per column")
        u.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "vectors", u)
        object.__setattr__(self, "values", d)

    @property
    def dimension(self) -> int:
        return int(self.values.shape[0])

    def reconstruct(self) -> Array:
        """U·diag(D)·Uᵀ."""
        return (self.vectors * self.values) @ self.vectors.T

    def orthogonality_error(self) -> float:
        """max |UUᵀ − I|."""
        return float(np.max(np.abs(self.vectors @ self.vectors.T - np.eye(self.dimension))))


def _check_symmetric(matrix: ArrayLike) -> Array:
    a = np.array(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError(f"Expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DomainError("Matrix has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    if a.size and np.max(np.abs(a - a.T)) > SYMMETRY_TOLERANCE * scale:
        raise DomainError("Matrix is not symmetric within 1e-12")
    return 0.5 * (a + a.T)


def _off_norm(a: Array) -> float:
    return float(np.sqrt(max(np.sum(a * a) - np.sum(np.diag(a) ** 2), 0.0)))


def _jacobi(a: Array, max_sweeps: int) -> tuple[Array, Array, int]:
    n = a.shape[0]
    v = np.eye(n)
    target = JACOBI_TOLERANCE * float(np.linalg.norm(a))
    for sweep in range(max_sweeps + 1):
        off = _off_norm(a)
        if off <= target:
            logger.debug("Jacobi converged after %d sweep(s), off-diagonal norm %.2e", sweep, off)
            return np.diag(a).copy(), v, sweep
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0)) if theta else 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0
                vec_p, vec_q = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vec_p - s * vec_q
                v[:, q] = s * vec_p + c * vec_q
    raise ConvergenceError(f"Jacobi eigensolver did not converge in {max_sweeps} sweeps")


def sym_eig(
    matrix: ArrayLike,
    method: Literal["jacobi", "lapack"] = "jacobi",
    max_sweeps: int = MAX_SWEEPS,
) -> SymEig:
    """Eigendecomposition of a symmetric matrix.

    Cyclic Jacobi rotations run until the off-diagonal Frobenius norm is at
    most 1e-13·‖A‖_F. ``method="lapack"`` uses ``scipy.linalg.eigh`` instead.

    Raises:
        DomainError: If the matrix is not square and symmetric within 1e-12
        ConvergenceError: If Jacobi hits the sweep cap
    """
    a = _check_symmetric(matrix)
    if method == "lapack":
        values, vectors = linalg.eigh(a)
        sweeps = 0
    elif method == "jacobi":
        values, vectors, sweeps = _jacobi(a.copy(), max_sweeps)
    else:
        raise ValueError(f"Unknown eigensolver: {method}")
    order = np.argsort(-values, kind="stable")
    return SymEig(vectors=vectors[:, order], values=values[order], sweeps=sweeps)


def solve_symmetric_sylvester(eig: SymEig, rhs: ArrayLike) -> Array:
    """Solve P·S + S·P = Ξ for S, with P = U·diag(D)·Uᵀ positive definite.

    S = U·((UᵀΞU) ÷ (D_i + D_j))·Uᵀ.
    """
    u = eig.vectors
    xi = np.asarray(rhs, dtype=float)
    denom = eig.values[:, None] + eig.values[None, :]
    return u @ ((u.T @ xi @ u) / denom) @ u.T
