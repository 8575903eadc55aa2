"""Central finite differences with Richardson extrapolation."""

from __future__ import annotations

import logging
from collections.abc import Callable
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray

from pathgrad.core.exceptions import RichardsonError
from pathgrad.oracle.models import OracleResult

logger = logging.getLogger(__name__)

EPS = np.finfo(float).eps

# Largest relative change accepted from the best entry of a stalled tableau
STALL_RTOL = 1e-6


def parameter_step(theta: ArrayLike, base_step: float, positive: bool = True) -> NDArray[np.float64]:
    """FD step ``base_step·max(|θ|, 1)``.

    For positive parameters the step is capped at 0.1·θ so θ − h stays in
    the domain even for tiny shape parameters.
    """
    theta_arr = np.asarray(theta, dtype=float)
    step = base_step * np.maximum(np.abs(theta_arr), 1.0)
    if positive:
        step = np.minimum(step, 0.1 * theta_arr)
    return step


def richardson_central_difference(
    func: Callable[[NDArray[np.float64]], NDArray[np.float64]],
    theta: ArrayLike,
    step: ArrayLike,
    levels: int = 4,
    value_rtol: ArrayLike = EPS,
) -> OracleResult:
    """Derivative of ``func`` at ``theta`` by Richardson-extrapolated central differences.

    Steps h, h/2, ..., h/2^(levels-1) feed a tableau eliminating the h², h⁴,
    ... error terms. ``func`` must accept an array of parameter values
    (broadcast against ``theta``) and return values of matching shape.

    Where the diagonal stops contracting above the rounding floor, the
    diagonal entry with the smallest change from its predecessor is used
    instead, and a warning is logged.

    Args:
        func: Map θ ↦ value (vectorized)
        theta: Point(s) of differentiation
        step: Initial step(s), positive
        levels: Tableau depth (≥ 2)
        value_rtol: Relative rounding level of ``func`` values (default
            machine epsilon); sets the floor below which a stall is noise

    Returns:
        OracleResult with the extrapolated derivative and its error estimate

    Raises:
        RichardsonError: If even the best diagonal entry changes by more
            than STALL_RTOL relative to its value
    """
    theta_arr = np.asarray(theta, dtype=float)
    h0 = np.asarray(step, dtype=float)
    if np.any(h0 <= 0):
        raise ValueError("Finite-difference steps must be positive")

    tableau: list[list[NDArray[np.float64]]] = []
    scale = np.zeros(np.broadcast(theta_arr, h0).shape)
    for k in range(levels):
        h = h0 / 2.0**k
        upper = np.asarray(func(theta_arr + h), dtype=float)
        lower = np.asarray(func(theta_arr - h), dtype=float)
        scale = np.maximum(scale, np.maximum(np.abs(upper), np.abs(lower)))
        row = [(upper - lower) / (2.0 * h)]
        for m in range(1, k + 1):
            factor = 4.0**m - 1.0
            row.append(row[m - 1] + (row[m - 1] - tableau[k - 1][m - 1]) / factor)
        tableau.append(row)

    h_min = h0 / 2.0 ** (levels - 1)
    # rounding floor of the finest central difference
    rounding = 8.0 * np.maximum(np.asarray(value_rtol, dtype=float), EPS) * scale / h_min
    value = tableau[-1][-1]
    error = np.abs(tableau[-1][-1] - tableau[-1][-2])

    if levels >= 3:
        diagonal = np.stack([tableau[k][k] for k in range(levels)])
        changes = np.abs(np.diff(diagonal, axis=0))
        first, last = changes[0], changes[-1]
        floor = 8.0 * rounding + 1e-14 * np.abs(value)
        stalled = (last > first) & (last > floor)
        if np.any(stalled):
            best = np.argmin(changes, axis=0) + 1
            best_value = np.take_along_axis(diagonal, best[None], axis=0)[0]
            best_change = np.min(changes, axis=0)
            unsettled = stalled & (best_change > STALL_RTOL * np.abs(best_value) + floor)
            if np.any(unsettled):
                raise RichardsonError(
                    f"Richardson sequence failed to contract at {int(np.count_nonzero(unsettled))} point(s)"
                )
            logger.warning(
                "Richardson diagonal stalled at %d point(s); using the best tableau entry",
                int(np.count_nonzero(stalled)),
            )
            value = np.where(stalled, best_value, value)
            error = np.where(stalled, best_change, error)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(first > 0, last / first, 0.0)
        logger.debug("Richardson contraction ratio (max): %.3g", float(np.max(ratio, initial=0.0)))

    error = np.maximum(error, rounding)
    return OracleResult(value=_squeeze(value), error_estimate=_squeeze(error))


def _squeeze(value: NDArray[np.float64]) -> Any:
    if value.ndim == 0:
        return value.item()
    return value
