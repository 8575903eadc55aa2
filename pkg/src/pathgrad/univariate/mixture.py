"""Finite mixtures of univariate distributions.

Weights are a softmax of logits with the last logit pinned to zero, so a
K-component mixture has K − 1 free logits. Component parameters are named
``<name>_<k>`` and logits ``logit_<j>``.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np
from numpy.typing import ArrayLike

from pathgrad.core.exceptions import DomainError
from pathgrad.univariate.base import Array, DerivativeKind, ScalarDistribution
from pathgrad.univariate.families import Normal
from pathgrad.univariate.master import check_master_inputs, pathwise_dz_dtheta

BISECTION_ITERATIONS = 200


def _out(value: Any) -> Any:
    arr = np.asarray(value, dtype=float)
    return arr.item() if arr.ndim == 0 else arr


@dataclass(frozen=True, eq=False)
class MixtureDistribution(ScalarDistribution):
    """Σ_k π_k q_{θ_k}(z) with π = softmax(ℓ_0, ..., ℓ_{K−2}, 0).

    Attributes:
        components: Component distributions
        logits: The K − 1 free logits
    """

    components: tuple[ScalarDistribution, ...] = ()
    logits: tuple[Any, ...] = ()

    def __post_init__(self):
        if not self.components:
            raise DomainError("A mixture needs at least one component")
        object.__setattr__(self, "components", tuple(self.components))
        object.__setattr__(self, "logits", tuple(self.logits))
        if len(self.logits) != len(self.components) - 1:
            raise DomainError(
                f"{len(self.components)} components need {len(self.components) - 1} logits, "
                f"got {len(self.logits)}"
            )

    @classmethod
    def from_weights(cls, components: Sequence[ScalarDistribution], weights: Sequence[float]) -> MixtureDistribution:
        """Build from a probability vector.

        Raises:
            DomainError: If the weights are not a probability vector or the
                last weight is zero
        """
        w = np.asarray(weights, dtype=float)
        if w.shape != (len(components),) or np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise DomainError("Mixture weights must be a probability vector, one per component")
        if w[-1] <= 0:
            raise DomainError("The last mixture weight anchors the logits and must be positive")
        with np.errstate(divide="ignore"):
            logits = np.log(w[:-1]) - np.log(w[-1])
        return cls(tuple(components), tuple(float(v) for v in logits))

    # -- parameter bookkeeping ---------------------------------------------

    @property
    def n_components(self) -> int:
        return len(self.components)

    def _slots(self) -> list[tuple[int | None, int]]:
        """(component or None for logits, local index) per flat parameter."""
        slots: list[tuple[int | None, int]] = []
        for k, comp in enumerate(self.components):
            slots.extend((k, i) for i in range(len(comp.param_names)))
        slots.extend((None, j) for j in range(len(self.logits)))
        return slots

    @property
    def param_names(self) -> tuple[str, ...]:  # type: ignore[override]
        names = [f"{name}_{k}" for k, comp in enumerate(self.components) for name in comp.param_names]
        names.extend(f"logit_{j}" for j in range(len(self.logits)))
        return tuple(names)

    @property
    def theta(self) -> tuple[Any, ...]:
        values: list[Any] = [p for comp in self.components for p in comp.theta]
        values.extend(self.logits)
        return tuple(values)

    def is_positive(self, index: int) -> bool:
        owner, local = self._slots()[index]
        return False if owner is None else self.components[owner].is_positive(local)

    def with_param(self, index: int, value: ArrayLike) -> MixtureDistribution:
        owner, local = self._slots()[self.param_index(index)]
        if owner is None:
            logits = list(self.logits)
            logits[local] = value
            return MixtureDistribution(self.components, tuple(logits))
        components = list(self.components)
        components[owner] = components[owner].with_param(local, value)
        return MixtureDistribution(tuple(components), self.logits)

    def component_param(self, k: int, which: int | str) -> int:
        """Flat index of parameter ``which`` of component ``k``."""
        local = self.components[k].param_index(which)
        return self._slots().index((k, local))

    def logit_param(self, j: int) -> int:
        """Flat index of logit ``j``."""
        if not 0 <= j < len(self.logits):
            raise IndexError(f"Logit index {j} out of range; the last logit is pinned to zero")
        return self._slots().index((None, j))

    @property
    def weights(self) -> list[Any]:
        """Mixture probabilities π_k (arrays if a logit is an array)."""
        stacked = np.stack(np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in self.logits), np.asarray(0.0)))
        stacked = stacked - stacked.max(axis=0)
        expd = np.exp(stacked)
        probs = expd / expd.sum(axis=0)
        return [_out(p) for p in probs]

    @property
    def derivative_kind(self) -> DerivativeKind:
        kinds = {c.derivative_kind for c in self.components}
        if DerivativeKind.ORACLE in kinds:
            return DerivativeKind.ORACLE
        if DerivativeKind.APPROX in kinds:
            return DerivativeKind.APPROX
        return DerivativeKind.ANALYTIC

    # -- density and distribution function ----------------------------------

    @property
    def support(self) -> tuple[float, float]:
        lows, highs = zip(*(c.support for c in self.components), strict=True)
        return (min(lows), max(highs))

    def _weighted(self, method: str, z: ArrayLike) -> Any:
        z_arr = np.asarray(z, dtype=float)
        total = np.zeros(np.broadcast(z_arr, *map(np.asarray, self.weights)).shape)
        for w, comp in zip(self.weights, self.components, strict=True):
            total = total + w * np.asarray(getattr(comp, method)(z_arr), dtype=float)
        return total

    def pdf(self, z: ArrayLike) -> Any:
        return _out(self._weighted("pdf", z))

    def cdf(self, z: ArrayLike) -> Any:
        return _out(self._weighted("cdf", z))

    def sf(self, z: ArrayLike) -> Any:
        return _out(self._weighted("sf", z))

    def ppf(self, u: ArrayLike) -> Any:
        """Quantile by bisection between the extreme component quantiles."""
        u_arr = np.asarray(u, dtype=float)
        if np.any((u_arr < 0) | (u_arr > 1)):
            raise DomainError("Quantile requires u in [0, 1]")
        quantiles = np.stack([np.asarray(c.ppf(u_arr), dtype=float) for c in self.components])
        low, high = quantiles.min(axis=0), quantiles.max(axis=0)
        for _ in range(BISECTION_ITERATIONS):
            mid = 0.5 * (low + high)
            below = np.asarray(self.cdf(mid)) < u_arr
            low = np.where(below, mid, low)
            high = np.where(below, high, mid)
            if np.all(high - low <= 4.0 * np.finfo(float).eps * np.maximum(np.abs(mid), 1.0)):
                break
        return _out(0.5 * (low + high))

    def sample(self, rng: np.random.Generator, size: int | tuple[int, ...]) -> Array:
        """Ancestral sampling: draw a component, then a value from it."""
        weights = np.asarray(self.weights, dtype=float)
        labels = rng.choice(self.n_components, size=size, p=weights)
        out = np.empty(labels.shape)
        for k, comp in enumerate(self.components):
            mask = labels == k
            count = int(np.count_nonzero(mask))
            if count:
                out[mask] = comp.sample(rng, count)
        return out

    # -- derivatives --------------------------------------------------------

    def score(self, z: ArrayLike, index: int) -> Any:
        owner, local = self._slots()[self.param_index(index)]
        z_arr = np.asarray(z, dtype=float)
        q = np.asarray(self.pdf(z_arr), dtype=float)
        weights = self.weights
        if owner is None:
            q_j = np.asarray(self.components[local].pdf(z_arr), dtype=float)
            return _out(weights[local] * (q_j / q - 1.0))
        comp = self.components[owner]
        q_k = np.asarray(comp.pdf(z_arr), dtype=float)
        return _out(weights[owner] * q_k * np.asarray(comp.score(z_arr, local)) / q)

    def dcdf_dtheta(self, z: ArrayLike, index: int) -> Any:
        owner, local = self._slots()[self.param_index(index)]
        z_arr = np.asarray(z, dtype=float)
        weights = self.weights
        if owner is None:
            # Σ_k π_k(δ_kj − π_j)F_k = π_j(F_j − F)
            f_j = np.asarray(self.components[local].cdf(z_arr), dtype=float)
            return _out(weights[local] * (f_j - np.asarray(self.cdf(z_arr))))
        comp = self.components[owner]
        return _out(weights[owner] * np.asarray(comp.dcdf_dtheta(z_arr, local), dtype=float))


def mixture_dz_dtheta(mix: MixtureDistribution, z: ArrayLike, which: tuple[int, int | str]) -> Any:
    """dz/dθ for parameter ``which = (k, name)`` of component k.

    Normal locations use the closed form π_k q_k(z)/q(z); everything else the
    weighted component CDF derivative over the mixture density.

    Raises:
        SingularDensityError: If q(z) < 1e-300
    """
    k, name = which
    comp = mix.components[k]
    index = mix.component_param(k, name)
    if isinstance(comp, Normal) and comp.param_index(name) == 0:
        z_arr = np.asarray(z, dtype=float)
        density = check_master_inputs(mix, z_arr)
        return _out(mix.weights[k] * np.asarray(comp.pdf(z_arr)) / density)
    return pathwise_dz_dtheta(mix, z, index)


def mixture_dz_dlogit(mix: MixtureDistribution, z: ArrayLike, j: int) -> Any:
    """dz/dℓ_j with ∂F/∂ℓ_j = π_j(F_j(z) − F(z)).

    Raises:
        IndexError: For the pinned last logit
        SingularDensityError: If q(z) < 1e-300
    """
    return pathwise_dz_dtheta(mix, z, mix.logit_param(j))
