"""Accuracy of the fast shape derivatives against the finite-difference oracle."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Literal

import numpy as np
from numpy.typing import NDArray
from scipy import special

from pathgrad.config import get_config
from pathgrad.core.constants import DENSITY_FLOOR
from pathgrad.core.exceptions import DomainError, RichardsonError
from pathgrad.oracle.reference import beta_dz_dalpha_reference, gamma_dz_dalpha_reference
from pathgrad.shape_grad.beta import beta_dz_dalpha, beta_region_ids
from pathgrad.shape_grad.gamma import gamma_dz_dalpha, gamma_region_ids

logger = logging.getLogger(__name__)

Array = NDArray[np.float64]
Target = Literal["gamma", "beta"]

GAMMA_ALPHA_RANGE = (1e-3, 100.0)
BETA_SHAPE_RANGE = (0.01, 1000.0)

ACCURACY_COLUMNS = {
    "gamma": ["alpha", "z", "approx", "oracle", "rel_error", "region"],
    "beta": ["alpha", "beta", "z", "approx", "oracle", "rel_error", "region"],
}


@dataclass
class AccuracyReport:
    """Per-point comparison and its summary."""

    target: str
    threshold: float
    records: list[dict[str, Any]] = field(default_factory=list)
    skipped: int = 0

    @property
    def max_rel_error(self) -> float:
        errors = [r["rel_error"] for r in self.records if math.isfinite(r["rel_error"])]
        return max(errors, default=0.0)

    @property
    def passed(self) -> bool:
        return bool(self.records) and self.max_rel_error <= self.threshold

    def by_region(self) -> dict[str, float]:
        """Max relative error per region id."""
        out: dict[str, float] = {}
        for r in self.records:
            if math.isfinite(r["rel_error"]):
                out[r["region"]] = max(out.get(r["region"], 0.0), r["rel_error"])
        return out

    @property
    def columns(self) -> list[str]:
        return ACCURACY_COLUMNS[self.target]


def _axis(low: float, high: float, n: int) -> Array:
    if n == 1:
        return np.array([math.sqrt(low * high)])
    return np.geomspace(low, high, n)


def _quantiles(n: int) -> Array:
    return (np.arange(n) + 0.5) / n


def accuracy_grid(target: Target, points: int) -> tuple[Array, ...]:
    """Stratified grid with ``points`` entries before support filtering.

    Parameters are log-spaced, quantiles evenly stratified, and z is the
    quantile mapped through the inverse CDF. Returns (params..., z).
    """
    if points < 1:
        raise DomainError("Accuracy grid needs at least one point")
    if target == "gamma":
        n_a = max(1, round(math.sqrt(points)))
        n_u = math.ceil(points / n_a)
        alpha, u = np.meshgrid(_axis(*GAMMA_ALPHA_RANGE, n_a), _quantiles(n_u), indexing="ij")
        alpha, u = alpha.ravel()[:points], u.ravel()[:points]
        return alpha, special.gammaincinv(alpha, u)
    if target == "beta":
        n_a = max(1, round(points ** (1.0 / 3.0)))
        n_u = math.ceil(points / (n_a * n_a))
        axis = _axis(*BETA_SHAPE_RANGE, n_a)
        a, b, u = np.meshgrid(axis, axis, _quantiles(n_u), indexing="ij")
        a, b, u = a.ravel()[:points], b.ravel()[:points], u.ravel()[:points]
        return a, b, special.betaincinv(a, b, u)
    raise DomainError(f"Unknown accuracy target: {target}")


def _valid(target: Target, params: tuple[Array, ...], z: Array) -> NDArray[np.bool_]:
    with np.errstate(divide="ignore", invalid="ignore"):
        if target == "gamma":
            (alpha,) = params
            ok = np.isfinite(z) & (z > DENSITY_FLOOR)
            log_density = (alpha - 1.0) * np.log(z) - z - special.gammaln(alpha)
        else:
            a, b = params
            ok = np.isfinite(z) & (z > DENSITY_FLOOR) & (z < 1.0)
            log_density = (a - 1.0) * np.log(z) + (b - 1.0) * np.log1p(-z) - special.betaln(a, b)
    return ok & np.isfinite(log_density) & (log_density >= math.log(DENSITY_FLOOR))


def _oracle(target: Target, params: tuple[Array, ...], z: Array) -> Array:
    reference = gamma_dz_dalpha_reference if target == "gamma" else beta_dz_dalpha_reference
    try:
        return np.asarray(reference(z, *params), dtype=float)
    except RichardsonError:
        logger.debug("Batch oracle stalled; evaluating point by point")
    out = np.full(z.shape, np.nan)
    for k in range(z.size):
        try:
            out[k] = reference(z[k], *(p[k] for p in params))
        except RichardsonError:
            continue
    return out


def verify_accuracy(target: Target, points: int | None = None, threshold: float | None = None) -> AccuracyReport:
    """Compare the fast derivative with the oracle on a stratified grid.

    Args:
        target: "gamma" (dz/dα of Gamma(α, 1)) or "beta" (dz/dα of Beta(α, β))
        points: Grid size before support filtering (default from config)
        threshold: Max relative error for a pass (default from config)

    Raises:
        DomainError: For an unknown target
        CoefficientFileError: If a surface is missing under the ``error`` policy
    """
    config = get_config()
    points = points or int(config.get("accuracy", "points", default=400))
    if threshold is None:
        threshold = float(config.get("accuracy", f"{target}_threshold", default=1e-3))

    *params, z = accuracy_grid(target, points)
    mask = _valid(target, tuple(params), z)
    params = [p[mask] for p in params]
    z = z[mask]
    report = AccuracyReport(target=target, threshold=threshold, skipped=int((~mask).sum()))
    if report.skipped:
        logger.info("Skipped %d grid point(s) whose sample or density underflows", report.skipped)
    if z.size == 0:
        return report

    if target == "gamma":
        approx = np.asarray(gamma_dz_dalpha(z, params[0]), dtype=float)
        regions = np.atleast_1d(gamma_region_ids(z, params[0]))
    else:
        approx = np.asarray(beta_dz_dalpha(z, params[0], params[1]), dtype=float)
        regions = np.atleast_1d(beta_region_ids(z, params[0], params[1]))
    oracle = _oracle(target, tuple(params), z)
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.abs(approx - oracle) / np.abs(oracle)

    names = ACCURACY_COLUMNS[target][: len(params)]
    for k in range(z.size):
        record: dict[str, Any] = {name: float(p[k]) for name, p in zip(names, params)}
        record.update(
            z=float(z[k]), approx=float(approx[k]), oracle=float(oracle[k]),
            rel_error=float(rel[k]), region=str(regions[k]),
        )
        report.records.append(record)

    for region, err in sorted(report.by_region().items()):
        logger.info("  %-14s max rel error %.3e", region, err)
    return report
