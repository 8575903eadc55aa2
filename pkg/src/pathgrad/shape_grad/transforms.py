"""Coordinate transforms and prefactors for rational surfaces.

Surfaces are stored by transform and prefactor ids so a coefficient file
fully describes how to evaluate itself.
"""

from __future__ import annotations

from collections.abc import Callable

import numpy as np
from numpy.typing import NDArray
from scipy import special

Array = NDArray[np.float64]
Params = tuple[Array, ...]

COORDINATE_TRANSFORMS: dict[str, Callable[[Array, Params], Array]] = {
    # Gamma coordinates; params = (alpha,)
    "log_z_over_alpha": lambda z, p: np.log(z / p[0]),
    "log_alpha": lambda z, p: np.log(p[0]),
    # Beta coordinates; params = (alpha, beta)
    "log_z": lambda z, p: np.log(z),
    "log_alpha_over_z": lambda z, p: np.log(p[0] / z),
    "log_total_z_over_alpha": lambda z, p: np.log((p[0] + p[1]) * z / p[0]),
    # Plain coordinates, used for synthetic fits
    "z": lambda z, p: z,
}


class Prefactor:
    """Map between the rational ratio p/q and the approximated quantity."""

    def apply(self, ratio: Array, z: Array, params: Params) -> Array:  # noqa: ARG002
        return ratio

    def target(self, values: Array, z: Array, params: Params) -> Array:  # noqa: ARG002
        return values

    def slope(self, ratio: Array, z: Array, params: Params) -> Array:  # noqa: ARG002
        """d value / d(p/q), for analytic fit Jacobians."""
        return np.ones_like(ratio)


class ExpRatio(Prefactor):
    """value = exp(p/q)."""

    def apply(self, ratio: Array, z: Array, params: Params) -> Array:
        return np.exp(ratio)

    def target(self, values: Array, z: Array, params: Params) -> Array:
        return np.log(values)

    def slope(self, ratio: Array, z: Array, params: Params) -> Array:
        return np.exp(ratio)


class BetaDigamma(Prefactor):
    """value = (p/q)·z(1−z)/β·(ψ(α+β) − ψ(α))."""

    @staticmethod
    def _scale(z: Array, params: Params) -> Array:
        alpha, beta = params
        return z * (1.0 - z) / beta * (special.psi(alpha + beta) - special.psi(alpha))

    def apply(self, ratio: Array, z: Array, params: Params) -> Array:
        return ratio * self._scale(z, params)

    def target(self, values: Array, z: Array, params: Params) -> Array:
        return values / self._scale(z, params)

    def slope(self, ratio: Array, z: Array, params: Params) -> Array:  # noqa: ARG002
        return self._scale(z, params)


PREFACTORS: dict[str, Prefactor] = {
    "identity": Prefactor(),
    "exp_ratio": ExpRatio(),
    "beta_digamma": BetaDigamma(),
}


def transform_coordinates(transform_ids: tuple[str, ...], z: Array, params: Params) -> list[Array]:
    """Evaluate each named coordinate transform.

    Raises:
        KeyError: For an unknown transform id
    """
    return [COORDINATE_TRANSFORMS[tid](z, params) for tid in transform_ids]
