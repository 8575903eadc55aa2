"""Synthetic variance experiments comparing pathwise and baseline estimators.

Each experiment builds its sources from an ExperimentConfig and returns a
VarianceTable. Per-experiment defaults live under ``experiments.<name>`` in
the configuration file (names there use underscores).
"""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import replace
from typing import Any, Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, Field
from scipy import special

from pathgrad.config import get_config
from pathgrad.core.exceptions import DomainError
from pathgrad.estimators.models import TestFunction
from pathgrad.estimators.sources import DirichletSource, MVNSource, UnivariateSource
from pathgrad.estimators.test_functions import (
    beta_cubic_exact,
    dirichlet_entropy_gradient,
    dirichlet_log_joint,
    linear,
    mvn_cosine,
    power,
    quadratic,
    quartic,
)
from pathgrad.estimators.variance import EstimatorSpec, SweepSpec, VarianceTable, variance_profile
from pathgrad.mvn.cholesky import CholeskyFactor
from pathgrad.mvn.velocity import VelocityKind
from pathgrad.univariate.families import Normal, SymmetricBeta
from pathgrad.univariate.mixture import MixtureDistribution

logger = logging.getLogger(__name__)

Array = NDArray[np.float64]
MVNFunction = Literal["cos", "quadratic", "quartic"]

RT_LABEL = "pathwise-rt"
OMT_LABEL = "pathwise-omt"


class ExperimentConfig(BaseModel):
    """Resolved settings for one ``bench-variance`` run."""

    experiment: str
    sweep: SweepSpec
    samples: int = Field(ge=2)
    seed: int = 0
    dims: int | None = Field(default=None, ge=2)
    categories: int | None = Field(default=None, ge=2)
    function: MVNFunction = "quadratic"
    workers: int | None = Field(default=None, ge=1)


def experiment_config(name: str, **overrides: Any) -> ExperimentConfig:
    """Defaults for ``name`` from config, with non-None overrides applied.

    Raises:
        DomainError: For an unknown experiment
    """
    if name not in EXPERIMENTS:
        raise DomainError(f"Unknown experiment {name!r}; choose from {', '.join(EXPERIMENTS)}")
    config = get_config()
    defaults = dict(config.get("experiments", name.replace("-", "_"), default={}) or {})
    values: dict[str, Any] = {
        "experiment": name,
        "sweep": defaults.get("sweep", "0:1:2:linear"),
        "samples": defaults.get("samples", config.samples),
        "seed": config.seed,
        "dims": defaults.get("dims"),
        "categories": defaults.get("categories"),
        "function": defaults.get("function", "quadratic"),
    }
    values.update({key: value for key, value in overrides.items() if value is not None})
    if isinstance(values["sweep"], str):
        values["sweep"] = SweepSpec.parse(values["sweep"])
    return ExperimentConfig(**values)


def _add_ratio(table: VarianceTable, numerator: str, denominator: str, column: str = "variance_ratio") -> None:
    """Attach numerator/denominator total-variance ratios to the numerator rows."""
    den = {row.sweep: row.total_variance for row in table.for_estimator(denominator)}
    for i, row in enumerate(table.rows):
        if row.estimator == numerator:
            ratio = row.total_variance / den[row.sweep] if den[row.sweep] > 0 else float("nan")
            table.rows[i] = replace(row, extra={**row.extra, column: ratio})


def _run(cfg: ExperimentConfig, estimators: list[EstimatorSpec], f: TestFunction | Callable[[float], TestFunction]) -> VarianceTable:
    logger.info(
        "Running %s: sweep %s, %d samples, seed %d", cfg.experiment, cfg.sweep, cfg.samples, cfg.seed
    )
    return variance_profile(cfg.sweep.values(), estimators, f, cfg.samples, cfg.seed, cfg.workers)


# =============================================================================
# Univariate experiments
# =============================================================================


def beta_cubic(cfg: ExperimentConfig) -> VarianceTable:
    """f(z) = z³ under Beta(α, α) across an α sweep; pathwise against score."""

    def build(alpha: float) -> UnivariateSource:
        return UnivariateSource(SymmetricBeta(alpha))

    f = replace(power(3), exact_gradient=lambda source: np.array([beta_cubic_exact(source.theta()[0])]))
    table = _run(cfg, [EstimatorSpec("pathwise", build), EstimatorSpec("score", build, "score")], f)
    _add_ratio(table, "pathwise", "score")
    return table


MIXTURE_MEANS = (0.0, 1.0)


def mixture_quartic_exact(logit: float) -> Array:
    """∇E[z⁴] over (μ_0, μ_1, ℓ_0) for π_0 N(0, 1) + π_1 N(1, 1).

    E[z⁴] under N(μ, 1) is μ⁴ + 6μ² + 3, so the weights pull 3 against 10.
    """
    p0 = float(special.expit(logit))
    p1 = 1.0 - p0
    moment = [m**4 + 6.0 * m**2 + 3.0 for m in MIXTURE_MEANS]
    slope = [4.0 * m**3 + 12.0 * m for m in MIXTURE_MEANS]
    return np.array([p0 * slope[0], p1 * slope[1], p0 * p1 * (moment[0] - moment[1])])


def mixture_quartic(cfg: ExperimentConfig) -> VarianceTable:
    """f(z) = z⁴ under a two-component Normal mixture across a logit sweep."""

    def build(logit: float) -> UnivariateSource:
        mix = MixtureDistribution((Normal(MIXTURE_MEANS[0], 1.0), Normal(MIXTURE_MEANS[1], 1.0)), (logit,))
        return UnivariateSource(mix, ["mu_0", "mu_1", "logit_0"])

    f = replace(power(4), exact_gradient=lambda source: mixture_quartic_exact(source.theta()[-1]))
    table = _run(cfg, [EstimatorSpec("pathwise", build), EstimatorSpec("score", build, "score")], f)
    _add_ratio(table, "pathwise", "score")
    return table


# =============================================================================
# Dirichlet ELBO
# =============================================================================


def synthetic_counts(categories: int, seed: int) -> NDArray[np.int64]:
    """Bag-of-words counts, every category seen at least once."""
    rng = np.random.default_rng(seed)
    probs = rng.dirichlet(np.ones(categories))
    return 1 + rng.multinomial(4 * categories, probs)


def elbo_objective(counts: ArrayLike, prior: float) -> TestFunction:
    """ELBO of Multinomial-Dirichlet in analytic-entropy form.

    E_q[log p(x, z)] carries the sampled term; ∇_α H[q] is added per sample
    as an explicit term. At the exact posterior α = prior + counts the
    gradient is zero.
    """
    base = dirichlet_log_joint(counts, prior)
    return replace(
        base,
        name="elbo",
        parameter_gradient=lambda z, source: np.broadcast_to(
            dirichlet_entropy_gradient(source.alpha), (len(z), source.alpha.shape[0])
        ),
        exact_gradient=lambda source: np.zeros(source.alpha.shape[0]),
    )


def dirichlet_elbo(cfg: ExperimentConfig) -> VarianceTable:
    """ELBO gradient at the exact posterior across a prior-concentration sweep."""
    counts = synthetic_counts(cfg.categories or 50, cfg.seed)

    def build(prior: float) -> DirichletSource:
        return DirichletSource(prior + counts)

    estimators = [EstimatorSpec("pathwise", build), EstimatorSpec("score", build, "score")]
    table = _run(cfg, estimators, lambda prior: elbo_objective(counts, prior))
    _add_ratio(table, "pathwise", "score")
    return table


# =============================================================================
# Multivariate Normal
# =============================================================================


def _mvn_pair(factor_for: Callable[[float], CholeskyFactor], entries: Any) -> list[EstimatorSpec]:
    return [
        EstimatorSpec(RT_LABEL, lambda v: MVNSource(factor_for(v), kind=VelocityKind.RT, entries=entries)),
        EstimatorSpec(OMT_LABEL, lambda v: MVNSource(factor_for(v), kind=VelocityKind.OMT, entries=entries)),
    ]


def synthetic_problem(dims: int, seed: int) -> tuple[Array, Array]:
    """(ΔL, Q): strictly lower uniform(0, 1) and symmetrized Bernoulli(½)."""
    rng = np.random.default_rng(seed)
    delta = np.tril(rng.uniform(size=(dims, dims)), -1)
    half = np.tril(rng.binomial(1, 0.5, size=(dims, dims)), -1).astype(float)
    return delta, half + half.T


def synthetic_function(name: MVNFunction, q: Array) -> TestFunction:
    if name == "cos":
        # cos(Σ_ij Q_ij z_i / D)
        return mvn_cosine(q.sum(axis=1) / q.shape[0])
    if name == "quadratic":
        return quadratic(q)
    if name == "quartic":
        return quartic(q)
    raise DomainError(f"Unknown test function {name!r}")


def mvn_synthetic(cfg: ExperimentConfig) -> VarianceTable:
    """L = I + r·ΔL across an r sweep; OMT/RT ratio over off-diagonal entries."""
    dims = cfg.dims or 50
    delta, q = synthetic_problem(dims, cfg.seed)

    def factor_for(r: float) -> CholeskyFactor:
        return CholeskyFactor(np.eye(dims) + r * delta)

    table = _run(cfg, _mvn_pair(factor_for, "strict"), synthetic_function(cfg.function, q))
    _add_ratio(table, OMT_LABEL, RT_LABEL)
    return table


BIVARIATE_W = (1.0, 1.0)


def bivariate_cos(cfg: ExperimentConfig) -> VarianceTable:
    """cos(wᵀz) with L = [[1, 0], [L21, 1]] across an L21 sweep."""

    def factor_for(l21: float) -> CholeskyFactor:
        return CholeskyFactor([[1.0, 0.0], [l21, 1.0]])

    table = _run(cfg, _mvn_pair(factor_for, [(1, 0)]), mvn_cosine(BIVARIATE_W))
    _add_ratio(table, OMT_LABEL, RT_LABEL)
    return table


def linear_closed_form_variances(kappa: ArrayLike) -> tuple[float, float]:
    """Closed-form total variances (RT, OMT) for f = κᵀz at L = I over strict-lower entries.

    Var_RT = Σ_{a>b} κ_a² and Var_OMT = ¼ Σ_{a>b} (κ_a² + κ_b²).
    """
    k2 = np.asarray(kappa, dtype=float) ** 2
    rows, cols = np.tril_indices(k2.size, -1)
    return float(k2[rows].sum()), float(0.25 * (k2[rows] + k2[cols]).sum())


def linear_kappa(dims: int, seed: int, draw: int) -> Array:
    return np.random.default_rng([seed, draw]).standard_normal(dims)


def linear_closed_form(cfg: ExperimentConfig) -> VarianceTable:
    """f = κᵀz at L = I; the sweep value indexes the κ draw."""
    dims = cfg.dims or 20
    identity = CholeskyFactor.identity(dims)

    def f_for(draw: float) -> TestFunction:
        return linear(linear_kappa(dims, cfg.seed, int(draw)))

    table = _run(cfg, _mvn_pair(lambda _: identity, "strict"), f_for)
    for i, row in enumerate(table.rows):
        var_rt, var_omt = linear_closed_form_variances(linear_kappa(dims, cfg.seed, int(row.sweep)))
        closed = var_rt if row.estimator == RT_LABEL else var_omt
        table.rows[i] = replace(
            row, extra={**row.extra, "closed_form_variance": closed, "empirical_ratio": row.total_variance / closed}
        )
    _add_ratio(table, OMT_LABEL, RT_LABEL)
    return table


EXPERIMENTS: dict[str, Callable[[ExperimentConfig], VarianceTable]] = {
    "beta-cubic": beta_cubic,
    "dirichlet-elbo": dirichlet_elbo,
    "mvn-synthetic": mvn_synthetic,
    "bivariate-cos": bivariate_cos,
    "mixture-quartic": mixture_quartic,
    "linear-closed-form": linear_closed_form,
}


def run_experiment(name: str, **overrides: Any) -> tuple[ExperimentConfig, VarianceTable]:
    """Resolve the configuration for ``name`` and run it.

    Raises:
        DomainError: For an unknown experiment or invalid settings
    """
    cfg = experiment_config(name, **overrides)
    return cfg, EXPERIMENTS[name](cfg)
