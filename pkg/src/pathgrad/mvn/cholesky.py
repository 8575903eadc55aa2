"""Cholesky-parameterized multivariate Normal: z = μ + L·z̃."""

from __future__ import annotations

from functools import cached_property
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg

from pathgrad.core.exceptions import DomainError, SingularCholeskyError
from pathgrad.mvn.linalg import SymEig, sym_eig

Array = NDArray[np.float64]

CONDITION_GUARD = 1e-12


class CholeskyFactor:
    """Immutable lower-triangular L with positive diagonal, Σ = L·Lᵀ.

    Inverse, precision P = Σ⁻¹ and its eigendecomposition are computed
    once per instance and shared by every field evaluated against it.
    """

    def __init__(self, matrix: ArrayLike, eig_method: str = "jacobi"):
        arr = np.array(matrix, dtype=float)
        if arr.ndim == 0:
            arr = arr.reshape(1, 1)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise DomainError(f"Cholesky factor must be square, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise SingularCholeskyError("Cholesky factor has non-finite entries")
        if np.any(np.triu(arr, 1) != 0):
            raise DomainError("Cholesky factor must be lower triangular")
        diag = np.diag(arr)
        if np.any(diag <= 0):
            raise SingularCholeskyError("Cholesky factor needs a strictly positive diagonal")
        arr.setflags(write=False)
        self._matrix = arr
        self._eig_method = eig_method

    def __repr__(self) -> str:
        return f"CholeskyFactor(dimension={self.dimension})"

    @classmethod
    def identity(cls, dimension: int) -> CholeskyFactor:
        return cls(np.eye(dimension))

    @classmethod
    def random(cls, dimension: int, rng: np.random.Generator, off_scale: float = 0.5) -> CholeskyFactor:
        """Random factor with diagonal in [0.5, 1.5] and off-diagonal N(0, off_scale²)."""
        mat = np.tril(off_scale * rng.standard_normal((dimension, dimension)), -1)
        mat += np.diag(rng.uniform(0.5, 1.5, dimension))
        return cls(mat)

    @property
    def matrix(self) -> Array:
        return self._matrix

    @property
    def dimension(self) -> int:
        return int(self._matrix.shape[0])

    @cached_property
    def covariance(self) -> Array:
        return self._matrix @ self._matrix.T

    @cached_property
    def inverse(self) -> Array:
        """L⁻¹ by triangular solve."""
        inv = linalg.solve_triangular(self._matrix, np.eye(self.dimension), lower=True)
        inv.setflags(write=False)
        return inv

    @cached_property
    def precision(self) -> Array:
        """P = Σ⁻¹ = L⁻ᵀL⁻¹."""
        prec = self.inverse.T @ self.inverse
        prec = 0.5 * (prec + prec.T)
        prec.setflags(write=False)
        return prec

    @cached_property
    def eig(self) -> SymEig:
        """Eigendecomposition of the precision matrix.

        Raises:
            SingularCholeskyError: If λ_min < 1e-12·λ_max
        """
        decomposition = sym_eig(self.precision, method=self._eig_method)  # type: ignore[arg-type]
        lam_max, lam_min = decomposition.values[0], decomposition.values[-1]
        if lam_min < CONDITION_GUARD * lam_max:
            raise SingularCholeskyError(
                f"Precision matrix too ill-conditioned (λ_min/λ_max = {lam_min / lam_max:.2e})"
            )
        return decomposition

    def solve(self, z: ArrayLike) -> Array:
        """L⁻¹z for z of shape (..., D), by triangular solve."""
        z_arr = np.asarray(z, dtype=float)
        flat = z_arr.reshape(-1, self.dimension).T
        out = linalg.solve_triangular(self._matrix, flat, lower=True)
        return out.T.reshape(z_arr.shape)

    def solve_transpose(self, z: ArrayLike) -> Array:
        """L⁻ᵀz for z of shape (..., D)."""
        z_arr = np.asarray(z, dtype=float)
        flat = z_arr.reshape(-1, self.dimension).T
        out = linalg.solve_triangular(self._matrix, flat, lower=True, trans="T")
        return out.T.reshape(z_arr.shape)

    def lower_indices(self) -> list[tuple[int, int]]:
        """(a, b) with a ≥ b in row-major order."""
        return [(a, b) for a in range(self.dimension) for b in range(a + 1)]

    def with_entry(self, a: int, b: int, value: float) -> CholeskyFactor:
        """Copy with L_ab replaced."""
        if b > a:
            raise DomainError(f"({a}, {b}) is above the diagonal")
        mat = self._matrix.copy()
        mat[a, b] = value
        return CholeskyFactor(mat, self._eig_method)

    def sample(self, rng: np.random.Generator, size: int, mean: ArrayLike | None = None) -> tuple[Array, Array]:
        """(z, z̃) with z̃ ~ N(0, I) and z = μ + L·z̃, shape (size, D)."""
        z_tilde = rng.standard_normal((size, self.dimension))
        offset: Any = 0.0 if mean is None else np.asarray(mean, dtype=float)
        return offset + z_tilde @ self._matrix.T, z_tilde

    def logpdf(self, z: ArrayLike, mean: ArrayLike | None = None) -> Array:
        """log N(z | μ, LLᵀ)."""
        z_arr = np.asarray(z, dtype=float)
        centered = z_arr - (0.0 if mean is None else np.asarray(mean, dtype=float))
        white = self.solve(centered)
        return (
            -0.5 * np.sum(white * white, axis=-1)
            - np.sum(np.log(np.diag(self._matrix)))
            - 0.5 * self.dimension * np.log(2.0 * np.pi)
        )
