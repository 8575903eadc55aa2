"""Rational polynomial surfaces in transformed coordinates."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.typing import NDArray

from pathgrad.shape_grad.transforms import (
    COORDINATE_TRANSFORMS,
    PREFACTORS,
    Params,
    transform_coordinates,
)

# Documented in every coefficient file header
MONOMIAL_ORDER = (
    "tensor-product monomials prod_k x_k**e_k, exponent tuples (e_0, ..., e_n) in "
    "lexicographic order with e_0 varying slowest; x_k is the k-th coordinate transform"
)


def monomial_exponents(degrees: tuple[int, ...]) -> list[tuple[int, ...]]:
    """Exponent tuples in lexicographic order, first coordinate slowest."""
    return list(itertools.product(*(range(d + 1) for d in degrees)))


def design_matrix(coords: list[NDArray[np.float64]], degrees: tuple[int, ...]) -> NDArray[np.float64]:
    """Monomial design matrix of shape (n_points, n_monomials)."""
    columns = []
    for exponents in monomial_exponents(degrees):
        col = np.ones_like(coords[0], dtype=float)
        for x, e in zip(coords, exponents, strict=True):
            if e:
                col = col * x**e
        columns.append(col)
    return np.stack(columns, axis=-1)


@dataclass(frozen=True)
class RationalSurface:
    """p/q in transformed coordinates, mapped through a prefactor.

    Attributes:
        distribution: "gamma" or "beta"
        region_id: Region of the RegionedApprox the surface serves
        transforms: Coordinate transform ids
        numerator_degrees: Per-coordinate numerator degrees
        denominator_degrees: Per-coordinate denominator degrees
        numerator: Numerator coefficients (MONOMIAL_ORDER)
        denominator: Denominator coefficients, constant term first
        prefactor: Prefactor id
        validation_max_rel_error: Held-out max relative error, if validated
        fit_seed: Seed of the fit that produced the coefficients
    """

    distribution: str
    region_id: str
    transforms: tuple[str, ...]
    numerator_degrees: tuple[int, ...]
    denominator_degrees: tuple[int, ...]
    numerator: NDArray[np.float64] = field(repr=False)
    denominator: NDArray[np.float64] = field(repr=False)
    prefactor: str = "identity"
    validation_max_rel_error: float | None = None
    fit_seed: int | None = None

    def __post_init__(self):
        for tid in self.transforms:
            if tid not in COORDINATE_TRANSFORMS:
                raise ValueError(f"Unknown coordinate transform: {tid}")
        if self.prefactor not in PREFACTORS:
            raise ValueError(f"Unknown prefactor: {self.prefactor}")
        n_coords = len(self.transforms)
        if len(self.numerator_degrees) != n_coords or len(self.denominator_degrees) != n_coords:
            raise ValueError("Degrees must match the number of coordinates")
        num = np.asarray(self.numerator, dtype=float)
        den = np.asarray(self.denominator, dtype=float)
        if num.shape != (len(monomial_exponents(self.numerator_degrees)),):
            raise ValueError("Numerator coefficient count does not match its degrees")
        if den.shape != (len(monomial_exponents(self.denominator_degrees)),):
            raise ValueError("Denominator coefficient count does not match its degrees")
        num.setflags(write=False)
        den.setflags(write=False)
        object.__setattr__(self, "numerator", num)
        object.__setattr__(self, "denominator", den)

    def _coords(self, z: NDArray[np.float64], params: Params) -> list[NDArray[np.float64]]:
        return transform_coordinates(self.transforms, z, params)

    def denominator_values(self, z: NDArray[np.float64], params: Params) -> NDArray[np.float64]:
        coords = self._coords(z, params)
        return design_matrix(coords, self.denominator_degrees) @ self.denominator

    def ratio(self, z: NDArray[np.float64], params: Params) -> NDArray[np.float64]:
        coords = self._coords(z, params)
        p = design_matrix(coords, self.numerator_degrees) @ self.numerator
        q = design_matrix(coords, self.denominator_degrees) @ self.denominator
        return p / q

    def evaluate(self, z: Any, *params: Any) -> NDArray[np.float64]:
        """Approximated quantity at z for the given distribution parameters."""
        arrays = np.broadcast_arrays(np.asarray(z, dtype=float), *(np.asarray(p, dtype=float) for p in params))
        z_arr, param_arrs = arrays[0], tuple(arrays[1:])
        return PREFACTORS[self.prefactor].apply(self.ratio(z_arr, param_arrs), z_arr, param_arrs)
