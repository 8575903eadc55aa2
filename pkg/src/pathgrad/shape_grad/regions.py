"""Region-partitioned approximations with first-match semantics."""

from __future__ import annotations

import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from enum import Enum
from typing import Any

import numpy as np
from numpy.typing import NDArray

from pathgrad.core.exceptions import DomainError

logger = logging.getLogger(__name__)

Array = NDArray[np.float64]
Predicate = Callable[..., NDArray[np.bool_]]
Evaluator = Callable[..., Array]


class FormulaKind(str, Enum):
    """Formula family used inside a region."""
    TAYLOR = "taylor"
    LR_FAR = "lr_far"
    LR_NEAR = "lr_near"
    RATIONAL = "rational"


@dataclass(frozen=True)
class Region:
    """One region of a RegionedApprox.

    Attributes:
        region_id: Stable identifier (written to accuracy CSVs)
        kind: Formula family
        predicate: (z, *params) ↦ boolean mask
        evaluate: (z, *params) ↦ values, called on the region's points only
    """

    region_id: str
    kind: FormulaKind
    predicate: Predicate
    evaluate: Evaluator


class RegionedApprox:
    """Ordered regions over (z, params) evaluated with first-match precedence.

    A point belongs to the first region whose predicate accepts it. The last
    region is expected to be a catch-all so the partition covers the domain.
    """

    def __init__(self, name: str, regions: Sequence[Region]):
        if not regions:
            raise ValueError("RegionedApprox needs at least one region")
        ids = [r.region_id for r in regions]
        if len(set(ids)) != len(ids):
            raise ValueError(f"Duplicate region ids in {name}: {ids}")
        self.name = name
        self.regions = tuple(regions)

    def __repr__(self) -> str:
        return f"RegionedApprox({self.name}, {[r.region_id for r in self.regions]})"

    @property
    def region_ids(self) -> tuple[str, ...]:
        return tuple(r.region_id for r in self.regions)

    def region(self, region_id: str) -> Region:
        for region in self.regions:
            if region.region_id == region_id:
                return region
        raise KeyError(region_id)

    def assign(self, z: Array, *params: Array) -> NDArray[np.int64]:
        """Index of the first matching region for every point.

        Raises:
            DomainError: If some point matches no region
        """
        assignment = np.full(z.shape, -1, dtype=np.int64)
        for index, region in enumerate(self.regions):
            open_points = assignment < 0
            if not open_points.any():
                break
            mask = np.asarray(region.predicate(z, *params), dtype=bool) & open_points
            assignment[mask] = index
        if np.any(assignment < 0):
            raise DomainError(f"{self.name}: {int(np.count_nonzero(assignment < 0))} point(s) match no region")
        return assignment

    def member_mask(self, region_id: str, z: Array, *params: Array) -> NDArray[np.bool_]:
        """Points whose first match is ``region_id``."""
        return self.assign(z, *params) == self.region_ids.index(region_id)

    def evaluate(self, z: Any, *params: Any) -> Array:
        """Evaluate the approximation on broadcast arrays."""
        arrays = np.broadcast_arrays(np.asarray(z, dtype=float), *(np.asarray(p, dtype=float) for p in params))
        z_arr, param_arrs = arrays[0], arrays[1:]
        assignment = self.assign(z_arr, *param_arrs)
        out = np.empty(z_arr.shape)
        for index, region in enumerate(self.regions):
            mask = assignment == index
            count = int(np.count_nonzero(mask))
            if count:
                out[mask] = region.evaluate(z_arr[mask], *(p[mask] for p in param_arrs))
            logger.debug("%s region %s: %d point(s)", self.name, region.region_id, count)
        return out

    def labels(self, z: Any, *params: Any) -> NDArray[np.str_]:
        """Region id per point."""
        arrays = np.broadcast_arrays(np.asarray(z, dtype=float), *(np.asarray(p, dtype=float) for p in params))
        assignment = self.assign(arrays[0], *arrays[1:])
        return np.asarray(np.asarray(self.region_ids, dtype=object)[assignment]).astype(str)
