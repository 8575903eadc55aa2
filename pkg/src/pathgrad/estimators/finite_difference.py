"""Common-random-number finite differences of E[f] (independent unbiasedness check)."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from pathgrad.config import get_config
from pathgrad.core.exceptions import DomainError
from pathgrad.estimators.models import TestFunction
from pathgrad.estimators.sampling import accumulate
from pathgrad.estimators.sources import GradientSource
from pathgrad.oracle.richardson import parameter_step

logger = logging.getLogger(__name__)

Array = NDArray[np.float64]

ROUNDING_FLOOR = 1e-9


@dataclass(frozen=True)
class FiniteDifferenceResult:
    """Central-difference estimate of ∂E[f]/∂θ.

    Attributes:
        value: Estimate at the final step
        standard_error: MC standard error of ``value``
        step: Final absolute step h
        retries: Number of step halvings
        parameter: Parameter label
    """

    value: float
    standard_error: float
    step: float
    retries: int
    parameter: str


def _differences(source: GradientSource, f: TestFunction, index: int, h: float):
    plus, minus = source.perturbed(index, h), source.perturbed(index, -h)
    plus_half, minus_half = source.perturbed(index, 0.5 * h), source.perturbed(index, -0.5 * h)

    def terms(noise: Array) -> Array:
        coarse = (f.value(plus.transform(noise)) - f.value(minus.transform(noise))) / (2.0 * h)
        fine = (f.value(plus_half.transform(noise)) - f.value(minus_half.transform(noise))) / h
        return np.stack([np.asarray(coarse, dtype=float), np.asarray(fine, dtype=float)], axis=-1)

    return terms


def fd_expectation_gradient(
    source: GradientSource,
    f: TestFunction,
    theta_index: int,
    n_samples: int,
    seed: int,
    step: float | None = None,
    max_retries: int | None = None,
    workers: int | None = None,
) -> FiniteDifferenceResult:
    """(Ē[f]_{θ+h} − Ē[f]_{θ−h})/(2h) with shared base noise.

    ``step`` is relative: h = step·max(|θ|, 1), capped at 0.1·θ for
    positive parameters. The estimate is also formed at h/2; when the two
    disagree by more than the MC standard error the step is halved and the
    run repeated, up to ``max_retries`` times.

    Raises:
        DomainError: If step ≤ 0 or the index is out of range
    """
    config = get_config()
    step = config.get("estimators", "fd_step", default=1e-3) if step is None else step
    max_retries = config.get("estimators", "fd_max_retries", default=3) if max_retries is None else max_retries
    if step <= 0:
        raise DomainError("Finite-difference step must be positive")
    if not 0 <= theta_index < len(source.parameters):
        raise DomainError(f"Parameter index {theta_index} out of range")

    theta = float(source.theta()[theta_index])
    h = float(parameter_step(theta, step, positive=source.is_positive(theta_index)))
    name = source.parameters[theta_index]
    chunk = source.max_chunk

    retries = 0
    while True:
        moments = accumulate(source.noise, _differences(source, f, theta_index, h), n_samples, seed, workers, chunk)
        assert moments.mean is not None
        coarse, fine = moments.mean
        se = float(np.sqrt(moments.variance[1] / moments.count))
        # rounding floor for noiseless (e.g. linear) cases
        tolerance = max(se, ROUNDING_FLOOR * max(abs(fine), 1.0))
        if abs(coarse - fine) <= tolerance or retries >= max_retries:
            if abs(coarse - fine) > tolerance:
                logger.warning(
                    "FD estimate for %s still step-sensitive after %d halving(s) (|Δ| = %.3g, se = %.3g)",
                    name, retries, abs(coarse - fine), se,
                )
            return FiniteDifferenceResult(float(fine), se, 0.5 * h, retries, name)
        retries += 1
        h *= 0.5
        logger.warning("Halving FD step for %s to %.3g (|Δ| = %.3g > se = %.3g)", name, h, abs(coarse - fine), se)
