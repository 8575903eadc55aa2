"""Pathwise and score-function gradient estimators."""

from __future__ import annotations

from pathgrad.config import get_config
from pathgrad.estimators.models import EstimatorKind, GradientEstimate, TestFunction
from pathgrad.estimators.sampling import accumulate
from pathgrad.estimators.sources import GradientSource


def _chunk(source: GradientSource, chunk_size: int | None) -> int:
    chunk_size = chunk_size or get_config().chunk_size
    limit = source.max_chunk
    return chunk_size if limit is None else min(chunk_size, limit)


def pathwise_gradient(
    source: GradientSource,
    f: TestFunction,
    n_samples: int,
    seed: int,
    workers: int | None = None,
    chunk_size: int | None = None,
) -> GradientEstimate:
    """Mean of v^θ(z)·∇f(z) over N draws (plus ∂f/∂θ when f depends on θ).

    Args:
        source: Distribution and velocity fields
        f: Test function with analytic gradient
        n_samples: Number of samples N (≥ 2)
        seed: Base seed; identical seeds give identical estimates
        workers: Sample shards (defaults to config)
        chunk_size: Samples per vectorized block (defaults to config)

    Returns:
        GradientEstimate over ``source.parameters``
    """
    moments = accumulate(
        source.noise,
        lambda noise: source.pathwise_terms(noise, f),
        n_samples, seed, workers, _chunk(source, chunk_size),
    )
    return GradientEstimate(
        kind=EstimatorKind.PATHWISE,
        parameters=source.parameters,
        mean=moments.mean,  # type: ignore[arg-type]
        variance=moments.variance,
        n_samples=moments.count,
        seed=seed,
        label=source.label,
    )


def score_function_gradient(
    source: GradientSource,
    f: TestFunction,
    n_samples: int,
    seed: int,
    workers: int | None = None,
    chunk_size: int | None = None,
) -> GradientEstimate:
    """Mean of f(z)·∇_θ log q_θ(z) over N draws.

    Raises:
        UnsupportedDistributionError: If the distribution has no analytic score
    """
    moments = accumulate(
        source.noise,
        lambda noise: source.score_terms(noise, f),
        n_samples, seed, workers, _chunk(source, chunk_size),
    )
    return GradientEstimate(
        kind=EstimatorKind.SCORE,
        parameters=source.parameters,
        mean=moments.mean,  # type: ignore[arg-type]
        variance=moments.variance,
        n_samples=moments.count,
        seed=seed,
        label="score",
    )
