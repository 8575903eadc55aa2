"""Fit rational surfaces to oracle samples.

Pipeline:
    1. draw (z, params) in the target region, z stratified over quantiles
    2. evaluate the oracle at every point
    3. linearized least squares p − t·(q − 1) = t with the constant of q fixed at 1
    4. nonlinear refinement of the relative error (scipy.optimize.least_squares)
    5. optional minimax polish by Lawson reweighting
    6. validation on an independent draw (seed + 1)
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any

import numpy as np
from numpy.typing import NDArray
from scipy import optimize, special

from pathgrad.core.constants import DENSITY_FLOOR
from pathgrad.core.exceptions import FitFailureError, RichardsonError
from pathgrad.oracle.models import FitSpec, OracleConfig, ValidationReport
from pathgrad.oracle.reference import beta_dz_dalpha_reference, gamma_dz_dalpha_reference
from pathgrad.shape_grad.beta import BETA_DZ_DALPHA
from pathgrad.shape_grad.gamma import GAMMA_DZ_DALPHA
from pathgrad.shape_grad.rational import RationalSurface, design_matrix
from pathgrad.shape_grad.regions import RegionedApprox
from pathgrad.shape_grad.transforms import PREFACTORS, transform_coordinates

logger = logging.getLogger(__name__)

Array = NDArray[np.float64]

PARAMETER_NAMES = {
    "gamma": ("alpha",),
    "beta": ("alpha", "beta"),
}

APPROXIMATIONS: dict[str, RegionedApprox] = {
    "gamma": GAMMA_DZ_DALPHA,
    "beta": BETA_DZ_DALPHA,
}

MAX_BATCHES = 50

# Lawson rounds without a new best max error before giving up
MINIMAX_PATIENCE = 3


@dataclass(frozen=True)
class OracleSamples:
    """Training or validation points with their oracle values."""

    z: Array
    params: tuple[Array, ...]
    values: Array

    def __len__(self) -> int:
        return int(self.z.shape[0])


@dataclass(frozen=True)
class FitOutcome:
    """Fitted surface and its held-out validation."""

    surface: RationalSurface
    report: ValidationReport


DEFAULT_FIT_SPECS: dict[str, FitSpec] = {
    "gamma": FitSpec(
        distribution="gamma",
        transforms=("log_z_over_alpha", "log_alpha"),
        numerator_degrees=(2, 3),
        denominator_degrees=(2, 3),
        prefactor="exp_ratio",
        parameter_ranges={"alpha": (1e-5, 10.0)},
        n_samples=15696,
        objective="minimax",
        minimax_iterations=10,
        target_rel_error=5e-4,
    ),
    "beta": FitSpec(
        distribution="beta",
        transforms=("log_z", "log_alpha_over_z", "log_total_z_over_alpha"),
        numerator_degrees=(2, 2, 3),
        denominator_degrees=(2, 2, 3),
        prefactor="beta_digamma",
        parameter_ranges={"alpha": (0.01, 1000.0), "beta": (0.01, 1000.0)},
        n_samples=3000,
        objective="minimax",
        minimax_iterations=10,
        target_rel_error=1e-3,
    ),
}


def _parameter_ranges(spec: FitSpec) -> list[tuple[float, float]]:
    names = PARAMETER_NAMES[spec.distribution]
    missing = [n for n in names if n not in spec.parameter_ranges]
    if missing:
        raise FitFailureError(f"FitSpec for {spec.distribution} lacks ranges for {missing}")
    return [spec.parameter_ranges[n] for n in names]


def _quantile_points(spec: FitSpec, u: Array, params: tuple[Array, ...]) -> Array:
    if spec.distribution == "gamma":
        return np.asarray(special.gammaincinv(params[0], u), dtype=float)
    return np.asarray(special.betaincinv(params[0], params[1], u), dtype=float)


def _log_density(spec: FitSpec, z: Array, params: tuple[Array, ...]) -> Array:
    with np.errstate(divide="ignore", invalid="ignore"):
        if spec.distribution == "gamma":
            (alpha,) = params
            return (alpha - 1.0) * np.log(z) - z - special.gammaln(alpha)
        alpha, beta = params
        return (alpha - 1.0) * np.log(z) + (beta - 1.0) * np.log1p(-z) - special.betaln(alpha, beta)


def _in_domain(spec: FitSpec, z: Array) -> NDArray[np.bool_]:
    ok = np.isfinite(z) & (z > 0)
    if spec.distribution == "beta":
        ok &= z < 1
    return ok


def _reference(spec: FitSpec, z: Array, params: tuple[Array, ...], config: OracleConfig) -> Array:
    if spec.distribution == "gamma":
        return np.asarray(gamma_dz_dalpha_reference(z, params[0], config), dtype=float)
    return np.asarray(beta_dz_dalpha_reference(z, params[0], params[1], config), dtype=float)


def _oracle_values(spec: FitSpec, z: Array, params: tuple[Array, ...], config: OracleConfig) -> Array:
    """Oracle values; points whose extrapolation fails come back as NaN."""
    try:
        return _reference(spec, z, params, config)
    except RichardsonError:
        logger.debug("Batch Richardson check failed; retrying %d point(s) one by one", z.size)
    values = np.full(z.shape, np.nan)
    for k in range(z.size):
        try:
            values[k] = _reference(spec, z[k:k + 1], tuple(p[k:k + 1] for p in params), config)[0]
        except RichardsonError:
            continue
    return values


def draw_oracle_samples(
    spec: FitSpec,
    seed: int | None = None,
    n_points: int | None = None,
    config: OracleConfig | None = None,
) -> OracleSamples:
    """Draw region points and evaluate the oracle there.

    Parameters are log-uniform over ``spec.parameter_ranges``; z is drawn at
    stratified quantiles of the distribution and kept only where the
    approximation assigns it to ``spec.region_id``.

    Raises:
        FitFailureError: If too few points land in the region
    """
    config = config or OracleConfig.from_config()
    seed = spec.seed if seed is None else seed
    n_points = n_points or spec.n_samples
    rng = np.random.default_rng(seed)
    ranges = _parameter_ranges(spec)
    approx = APPROXIMATIONS[spec.distribution]
    q_low, q_high = spec.quantile_range

    kept_z: list[Array] = []
    kept_params: list[list[Array]] = [[] for _ in ranges]
    kept_values: list[Array] = []
    count = 0
    for batch in range(MAX_BATCHES):
        size = 4 * n_points
        params = tuple(
            np.exp(rng.uniform(np.log(low), np.log(high), size)) for low, high in ranges
        )
        strata = (np.arange(size) + rng.uniform(size=size)) / size
        u = q_low + (q_high - q_low) * rng.permutation(strata)
        z = _quantile_points(spec, u, params)
        ok = _in_domain(spec, z)
        ok &= _log_density(spec, np.where(ok, z, 0.5), params) > np.log(DENSITY_FLOOR)
        if ok.any():
            member = np.zeros(size, dtype=bool)
            member[ok] = approx.member_mask(spec.region_id, z[ok], *(p[ok] for p in params))
            ok &= member
        if not ok.any():
            continue
        z, params = z[ok], tuple(p[ok] for p in params)
        values = _oracle_values(spec, z, params, config)
        good = np.isfinite(values) & (values != 0)
        kept_z.append(z[good])
        for k, p in enumerate(params):
            kept_params[k].append(p[good])
        kept_values.append(values[good])
        count += int(np.count_nonzero(good))
        logger.debug("Batch %d: %d region point(s), %d total", batch, int(np.count_nonzero(good)), count)
        if count >= n_points:
            break
    if count < n_points:
        raise FitFailureError(
            f"Only {count} of {n_points} {spec.distribution} points landed in region {spec.region_id}"
        )
    return OracleSamples(
        z=np.concatenate(kept_z)[:n_points],
        params=tuple(np.concatenate(p)[:n_points] for p in kept_params),
        values=np.concatenate(kept_values)[:n_points],
    )


class _Problem:
    """Design matrices and targets shared by every fitting stage."""

    def __init__(self, spec: FitSpec, samples: OracleSamples):
        self.spec = spec
        self.samples = samples
        self.prefactor = PREFACTORS[spec.prefactor]
        coords = transform_coordinates(spec.transforms, samples.z, samples.params)
        self.p_matrix = design_matrix(coords, spec.numerator_degrees)
        self.q_matrix = design_matrix(coords, spec.denominator_degrees)
        self.target = self.prefactor.target(samples.values, samples.z, samples.params)
        if spec.prefactor == "exp_ratio":
            # log-space residuals already measure relative error
            self.weights = np.ones_like(self.target)
        else:
            self.weights = 1.0 / np.maximum(np.abs(self.target), 1e-300)

    def split(self, x: Array) -> tuple[Array, Array]:
        n = self.spec.numerator_size
        return x[:n], np.concatenate(([1.0], x[n:]))

    def _ratio(self, x: Array) -> tuple[Array, Array]:
        num, den = self.split(x)
        q = self.q_matrix @ den
        return (self.p_matrix @ num) / q, q

    def rel_error(self, x: Array) -> Array:
        ratio, _ = self._ratio(x)
        approx = self.prefactor.apply(ratio, self.samples.z, self.samples.params)
        return (approx - self.samples.values) / self.samples.values

    def jacobian(self, x: Array) -> Array:
        """∂ rel_error / ∂x, numerator block then denominator block."""
        ratio, q = self._ratio(x)
        slope = self.prefactor.slope(ratio, self.samples.z, self.samples.params) / self.samples.values
        d_num = self.p_matrix / q[:, None]
        d_den = -(ratio / q)[:, None] * self.q_matrix[:, 1:]
        return slope[:, None] * np.hstack([d_num, d_den])

    def linearized(self, row_weights: Array) -> Array:
        """Solve p(x) − t·(q(x) − 1) = t in weighted least squares."""
        w = (self.weights * row_weights)[:, None]
        system = np.hstack([self.p_matrix, -self.target[:, None] * self.q_matrix[:, 1:]]) * w
        rhs = self.target * w[:, 0]
        norms = np.linalg.norm(system, axis=0)
        norms[norms == 0] = 1.0
        solution, *_ = np.linalg.lstsq(system / norms, rhs, rcond=None)
        return solution / norms


def _refine(problem: _Problem, x0: Array, row_weights: Array | None = None) -> Array:
    sqrt_w = np.sqrt(row_weights) if row_weights is not None else np.ones(len(problem.samples))

    def residual(x: Array) -> Array:
        err = problem.rel_error(x)
        return np.where(np.isfinite(err), err, 1e3) * sqrt_w

    def jacobian(x: Array) -> Array:
        jac = problem.jacobian(x)
        return np.where(np.isfinite(jac), jac, 0.0) * sqrt_w[:, None]

    result = optimize.least_squares(
        residual, x0, jac=jacobian, x_scale="jac", method="trf",
        max_nfev=problem.spec.max_refine_evaluations,
    )
    return result.x


def _minimax(problem: _Problem, x0: Array) -> Array:
    """Lawson iteration: reweight by |error| until the max error stops improving."""
    best, best_err = x0, float(np.max(np.abs(problem.rel_error(x0))))
    weights = np.full(len(problem.samples), 1.0 / len(problem.samples))
    x = x0
    stale = 0
    for iteration in range(problem.spec.minimax_iterations):
        err = np.abs(problem.rel_error(x))
        if not np.all(np.isfinite(err)):
            break
        weights = weights * err
        total = weights.sum()
        if total <= 0:
            break
        weights = weights / total
        x = _refine(problem, x, weights * len(weights))
        max_err = float(np.max(np.abs(problem.rel_error(x))))
        logger.debug("Minimax iteration %d: max relative error %.3e", iteration, max_err)
        if max_err < best_err:
            best, best_err = x, max_err
            stale = 0
        else:
            stale += 1
            if stale >= MINIMAX_PATIENCE:
                break
    return best


def _surface(spec: FitSpec, x: Array, numerator_size: int, max_err: float | None = None) -> RationalSurface:
    return RationalSurface(
        distribution=spec.distribution,
        region_id=spec.region_id,
        transforms=spec.transforms,
        numerator_degrees=spec.numerator_degrees,
        denominator_degrees=spec.denominator_degrees,
        numerator=x[:numerator_size],
        denominator=np.concatenate(([1.0], x[numerator_size:])),
        prefactor=spec.prefactor,
        validation_max_rel_error=max_err,
        fit_seed=spec.seed,
    )


def validate_surface(surface: RationalSurface, samples: OracleSamples, spec: FitSpec, seed: int) -> ValidationReport:
    """Relative error of a surface on held-out oracle samples."""
    approx = surface.evaluate(samples.z, *samples.params)
    rel = np.abs(approx - samples.values) / np.abs(samples.values)
    rel = np.where(np.isfinite(rel), rel, np.inf)
    den = surface.denominator_values(samples.z, samples.params)
    stable = bool(np.all(den > 0) or np.all(den < 0))
    return ValidationReport(
        max_rel_error=float(np.max(rel)) if rel.size else 0.0,
        mean_rel_error=float(np.mean(rel)) if rel.size else 0.0,
        n_points=int(rel.size),
        seed=seed,
        target_rel_error=spec.target_rel_error,
        denominator_sign_stable=stable,
    )


def fit_rational_surface(
    spec: FitSpec,
    samples: OracleSamples | None = None,
    validation: OracleSamples | None = None,
    config: OracleConfig | None = None,
) -> FitOutcome:
    """Fit a rational surface and validate it.

    Args:
        spec: Fit description
        samples: Training points (drawn with ``spec.seed`` if omitted)
        validation: Held-out points (drawn with ``spec.seed + 1`` if omitted)
        config: Oracle settings used when drawing samples

    Raises:
        FitFailureError: If the held-out max error exceeds twice the target or
            the denominator changes sign
    """
    if samples is None:
        samples = draw_oracle_samples(spec, spec.seed, config=config)
    if len(samples) < 10 * spec.free_coefficients:
        raise FitFailureError(
            f"{len(samples)} samples for {spec.free_coefficients} free coefficients"
        )
    problem = _Problem(spec, samples)
    x = problem.linearized(np.ones(len(samples)))
    logger.debug("Linearized fit: max relative error %.3e", float(np.max(np.abs(problem.rel_error(x)))))
    x = _refine(problem, x)
    if spec.objective == "minimax":
        x = _minimax(problem, x)
    train_err = float(np.max(np.abs(problem.rel_error(x))))
    logger.info("Fitted %s surface: training max relative error %.3e", spec.distribution, train_err)

    validation_seed = spec.seed + 1
    if validation is None:
        validation = draw_oracle_samples(spec, validation_seed, spec.n_validation, config=config)
    surface = _surface(spec, x, spec.numerator_size)
    report = validate_surface(surface, validation, spec, validation_seed)
    if not report.acceptable:
        raise FitFailureError(
            f"{spec.distribution} fit rejected: held-out max relative error {report.max_rel_error:.3e} "
            f"(target {spec.target_rel_error:.1e}, sign-stable denominator: {report.denominator_sign_stable})"
        )
    if not report.passed:
        logger.warning(
            "%s fit above target: %.3e > %.1e (within the 2x band)",
            spec.distribution, report.max_rel_error, spec.target_rel_error,
        )
    return FitOutcome(surface=_surface(spec, x, spec.numerator_size, report.max_rel_error), report=report)


def fit_spec_for(distribution: str, **overrides: Any) -> FitSpec:
    """Default FitSpec for ``distribution`` with field overrides."""
    try:
        base = DEFAULT_FIT_SPECS[distribution]
    except KeyError as e:
        raise FitFailureError(f"No default fit for distribution {distribution!r}", cause=e) from e
    return FitSpec.model_validate({**base.model_dump(), **overrides}) if overrides else base
