"""Sharded, chunked Monte Carlo accumulation of per-sample gradient terms."""

from __future__ import annotations

import logging
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from numpy.typing import NDArray

from pathgrad.config import get_config
from pathgrad.estimators.models import RunningMoments

logger = logging.getLogger(__name__)

Array = NDArray[np.float64]
NoiseFn = Callable[[np.random.Generator, int], Array]
TermsFn = Callable[[Array], Array]


def shard_sizes(n_samples: int, workers: int) -> list[int]:
    """Split N into ``workers`` near-equal shards, larger shards first."""
    base, extra = divmod(n_samples, workers)
    return [base + (1 if k < extra else 0) for k in range(workers)]


def _run_shard(
    child: np.random.SeedSequence, n: int, noise_fn: NoiseFn, terms_fn: TermsFn, chunk_size: int
) -> RunningMoments:
    rng = np.random.default_rng(child)
    moments = RunningMoments()
    remaining = n
    while remaining > 0:
        m = min(chunk_size, remaining)
        moments.update(terms_fn(noise_fn(rng, m)))
        remaining -= m
    return moments


def accumulate(
    noise_fn: NoiseFn,
    terms_fn: TermsFn,
    n_samples: int,
    seed: int,
    workers: int | None = None,
    chunk_size: int | None = None,
) -> RunningMoments:
    """Mean and M2 of ``terms_fn(noise)`` over ``n_samples`` draws.

    Worker k draws from ``SeedSequence(seed).spawn(workers)[k]``; shard
    moments are merged in worker order, so a fixed (seed, workers, chunk
    size) reproduces results bit for bit.

    Raises:
        ValueError: If fewer than 2 samples or workers < 1 are requested
    """
    config = get_config()
    workers = workers or config.workers
    chunk_size = chunk_size or config.chunk_size
    if n_samples < 2:
        raise ValueError("Monte Carlo estimation needs at least 2 samples")
    if workers < 1 or chunk_size < 1:
        raise ValueError("workers and chunk_size must be positive")

    workers = min(workers, n_samples)
    children = np.random.SeedSequence(seed).spawn(workers)
    sizes = shard_sizes(n_samples, workers)

    if workers == 1:
        shards = [_run_shard(children[0], sizes[0], noise_fn, terms_fn, chunk_size)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_run_shard, child, size, noise_fn, terms_fn, chunk_size)
                for child, size in zip(children, sizes)
            ]
            shards = [future.result() for future in futures]

    total = RunningMoments()
    for shard in shards:
        total.merge(shard)
    logger.debug("Accumulated %d samples over %d worker(s), chunk %d", total.count, workers, chunk_size)
    return total
