"""Command-line interface for pathgrad.

Subcommands verify approximation accuracy, fit rational surfaces, check
transport equations and run the variance experiments. Tables are written
as CSV with a provenance comment line.

Exit codes: 0 pass, 2 quantitative threshold failure or invalid settings (as
for argparse usage errors), 1 operational error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Any

# Load .env file if present (PATHGRAD_* overrides)
try:
    from dotenv import load_dotenv
    _env_path = Path.cwd() / ".env"
    if _env_path.exists():
        load_dotenv(_env_path)
except ImportError:
    pass

import numpy as np
import yaml
from pydantic import BaseModel, ValidationError

from pathgrad.config import Config, get_config, set_config
from pathgrad.core.exceptions import FitFailureError, PathgradError
from pathgrad.estimators.transport import (
    TransportReport,
    dirichlet_transport_residual,
    mvn_transport_residual,
    univariate_transport_residual,
)
from pathgrad.experiments.accuracy import verify_accuracy
from pathgrad.experiments.benchmarks import EXPERIMENTS, run_experiment
from pathgrad.io.coefficients import write_coefficient_file
from pathgrad.io.csv_writer import config_hash, write_table
from pathgrad.mvn.cholesky import CholeskyFactor
from pathgrad.mvn.velocity import VelocityKind
from pathgrad.oracle.fitting import fit_rational_surface, fit_spec_for
from pathgrad.shape_grad.registry import COEFFICIENT_FILES, SurfaceRegistry, set_registry
from pathgrad.univariate.base import DistributionRegistry

logging.basicConfig(
    level=logging.INFO,
    format="%(message)s"
)
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_THRESHOLD = 2
# argparse exits with 2 on usage errors; invalid settings files share it
EXIT_USAGE = 2

TRANSPORT_COLUMNS = ["target", "parameter", "max_residual", "mean_residual", "n_points"]
MVN_TARGETS = {"mvn-rt": VelocityKind.RT, "mvn-omt": VelocityKind.OMT}


class RunConfig(BaseModel):
    """Everything that determines a run's output; hashed into the CSV header."""

    command: str
    target: str | None = None
    seed: int
    samples: int | None = None
    points: int | None = None
    sweep: str | None = None
    dims: int | None = None
    function: str | None = None
    tolerance: float | None = None
    workers: int | None = None
    coefficient_dir: str
    coefficient_fallback: str
    params: dict[str, float] = {}


# Options whose values may start with "-" (negative sweep bounds)
SIGNED_VALUE_OPTIONS = ("--sweep",)


def _attach_option_values(argv: list[str]) -> list[str]:
    """Rewrite ``--sweep -1:1:3`` as ``--sweep=-1:1:3`` so argparse keeps the value."""
    out: list[str] = []
    pending = False
    for arg in argv:
        if pending:
            out[-1] = f"{out[-1]}={arg}"
            pending = False
            continue
        out.append(arg)
        pending = arg in SIGNED_VALUE_OPTIONS
    return out


def main(argv: list | None = None) -> int:
    """Main CLI entry point.

    Args:
        argv: Command line arguments (uses sys.argv if None)

    Returns:
        Exit code
    """
    parser = argparse.ArgumentParser(
        prog="pathgrad",
        description="Pathwise gradient estimators: accuracy checks, fitting and variance experiments",
        epilog="Examples:\n"
               "  pathgrad verify-accuracy gamma --allow-oracle-fallback\n"
               "  pathgrad fit-rational beta --coefficients coefficients\n"
               "  pathgrad check-transport mvn-omt --dims 3 --seed 7\n"
               "  pathgrad bench-variance --experiment mvn-synthetic --sweep 0.1:1:5 --out ratio.csv\n"
               "  pathgrad bench-variance --experiment bivariate-cos --sweep -1.5:1.5:7\n"
               "\n"
               "Sweeps starting at a negative value may be passed as --sweep -1.5:1.5:7 or --sweep=-1.5:1.5:7.",
        formatter_class=argparse.RawDescriptionHelpFormatter
    )

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--verbose", "-v", action="store_true", help="Verbose output")
    common.add_argument("--config", help="Configuration file (default: config/pathgrad.yaml)")
    common.add_argument("--seed", type=int, help="Base random seed (default: from config)")
    common.add_argument("--out", "-o", help="CSV output path (default: stdout)")
    common.add_argument("--tolerance", type=float, help="Override the pass threshold")
    common.add_argument("--workers", type=int, help="Sample shards (default: from config)")
    common.add_argument("--coefficients", help="Coefficient directory (default: from config)")
    common.add_argument(
        "--allow-oracle-fallback",
        action="store_true",
        help="Use the slow oracle where a coefficient file is missing"
    )

    subparsers = parser.add_subparsers(dest="command", help="Command to run")

    # VERIFY-ACCURACY command
    verify_parser = subparsers.add_parser(
        "verify-accuracy",
        parents=[common],
        help="Compare fast shape derivatives with the oracle on a stratified grid"
    )
    verify_parser.add_argument("target", choices=["gamma", "beta"], help="Derivative to check")
    verify_parser.add_argument("--points", type=int, help="Grid size (default: from config)")

    # FIT-RATIONAL command
    fit_parser = subparsers.add_parser(
        "fit-rational",
        parents=[common],
        help="Fit the rational surface of the middle region and write its coefficient file"
    )
    fit_parser.add_argument("target", choices=sorted(COEFFICIENT_FILES), help="Distribution to fit")
    fit_parser.add_argument("--fit-spec", help="YAML file of FitSpec field overrides")
    fit_parser.add_argument("--samples", type=int, help="Training points (default: from fit spec)")

    # CHECK-TRANSPORT command
    transport_parser = subparsers.add_parser(
        "check-transport",
        parents=[common],
        help="Evaluate transport-equation residuals of velocity fields"
    )
    transport_parser.add_argument(
        "target",
        help=f"mvn-rt, mvn-omt, dirichlet or one of: {', '.join(DistributionRegistry.list_names())}"
    )
    transport_parser.add_argument("--dims", type=int, help="Dimension (MVN) or categories (Dirichlet)")
    transport_parser.add_argument("--points", type=int, help="Evaluation points (default: from config)")
    transport_parser.add_argument(
        "--param",
        action="append",
        default=[],
        metavar="NAME=VALUE",
        help="Univariate parameter value (can specify multiple)"
    )

    # BENCH-VARIANCE command
    bench_parser = subparsers.add_parser(
        "bench-variance",
        parents=[common],
        help="Run a variance experiment over a parameter sweep"
    )
    bench_parser.add_argument("--experiment", required=True, choices=list(EXPERIMENTS), help="Experiment id")
    bench_parser.add_argument("--sweep", help="min:max:points[:linear|log] (default: from config)")
    bench_parser.add_argument("--samples", type=int, help="Samples per estimate (default: from config)")
    bench_parser.add_argument("--dims", type=int, help="Dimension for MVN experiments")
    bench_parser.add_argument("--categories", type=int, help="Categories for dirichlet-elbo")
    bench_parser.add_argument(
        "--function",
        choices=["cos", "quadratic", "quartic"],
        help="Test function for mvn-synthetic (default: quadratic)"
    )

    # Parse arguments
    args = parser.parse_args(_attach_option_values(sys.argv[1:] if argv is None else argv))

    # Default to showing help if no command
    if args.command is None:
        parser.print_help()
        return EXIT_OK

    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)

    try:
        _configure(args)

        if args.command == "verify-accuracy":
            return cmd_verify_accuracy(args)
        elif args.command == "fit-rational":
            return cmd_fit_rational(args)
        elif args.command == "check-transport":
            return cmd_check_transport(args)
        elif args.command == "bench-variance":
            return cmd_bench_variance(args)
        else:
            print(f"Command '{args.command}' not available", file=sys.stderr)
            return EXIT_ERROR

    except ValidationError as e:
        logger.error(f"Invalid settings: {e}")
        return EXIT_USAGE
    except (PathgradError, OSError, ValueError) as e:
        logger.error(f"Error: {e}")
        if args.verbose:
            import traceback
            traceback.print_exc()
        return EXIT_ERROR


def _configure(args: argparse.Namespace) -> None:
    """Install the configuration and surface registry this run uses."""
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise FileNotFoundError(f"Config file not found: {path}")
        set_config(Config(path))
    config = get_config()
    if args.seed is None:
        args.seed = config.seed
    args.coefficient_dir = str(args.coefficients or config.coefficient_dir)
    if args.allow_oracle_fallback:
        args.fallback = "oracle"
    elif args.command == "verify-accuracy":
        args.fallback = "error"
    else:
        args.fallback = config.coefficient_fallback
    set_registry(SurfaceRegistry(args.coefficient_dir, args.fallback))


def _run_config(args: argparse.Namespace, **fields: Any) -> RunConfig:
    return RunConfig(
        command=args.command,
        seed=args.seed,
        tolerance=args.tolerance,
        workers=args.workers,
        coefficient_dir=args.coefficient_dir,
        coefficient_fallback=args.fallback,
        **fields,
    )


def cmd_verify_accuracy(args: argparse.Namespace) -> int:
    """Execute verify-accuracy command.

    Args:
        args: Parsed arguments

    Returns:
        Exit code
    """
    path = Path(args.coefficient_dir) / COEFFICIENT_FILES[args.target]
    if args.fallback == "error" and not path.exists():
        logger.error(
            f"No coefficient file at {path}. Run `pathgrad fit-rational {args.target}` "
            "or pass --allow-oracle-fallback."
        )
        return EXIT_ERROR

    report = verify_accuracy(args.target, args.points, args.tolerance)
    run = _run_config(args, target=args.target, points=args.points)
    write_table(report.records, report.columns, args.seed, config_hash(run), args.out)

    logger.info(
        f"{args.target}: {len(report.records)} points, max relative error "
        f"{report.max_rel_error:.3e} (threshold {report.threshold:.1e})"
    )
    if not report.passed:
        logger.error("Accuracy threshold exceeded")
        return EXIT_THRESHOLD
    return EXIT_OK


def cmd_fit_rational(args: argparse.Namespace) -> int:
    """Execute fit-rational command.

    Args:
        args: Parsed arguments

    Returns:
        Exit code
    """
    overrides: dict[str, Any] = {}
    if args.fit_spec:
        with open(args.fit_spec) as f:
            overrides.update(yaml.safe_load(f) or {})
    if args.samples is not None:
        overrides["n_samples"] = args.samples
    if args.tolerance is not None:
        overrides["target_rel_error"] = args.tolerance
    overrides["seed"] = args.seed
    spec = fit_spec_for(args.target, **overrides)

    logger.info(f"Fitting {args.target} surface from {spec.n_samples} oracle samples...")
    try:
        outcome = fit_rational_surface(spec)
    except FitFailureError as e:
        logger.error(f"Error: {e}")
        return EXIT_THRESHOLD

    path = write_coefficient_file(
        outcome.surface, Path(args.coefficient_dir) / COEFFICIENT_FILES[args.target], outcome.report
    )
    report = outcome.report
    logger.info(f"  Coefficients: {path}")
    logger.info(
        f"  Validation: max {report.max_rel_error:.3e}, mean {report.mean_rel_error:.3e} "
        f"over {report.n_points} points (target {report.target_rel_error:.1e})"
    )
    if not report.passed:
        logger.error("Fit written but above its target accuracy")
        return EXIT_THRESHOLD
    return EXIT_OK


def _parse_params(pairs: list[str]) -> dict[str, float]:
    params: dict[str, float] = {}
    for pair in pairs:
        name, sep, value = pair.partition("=")
        if not sep:
            raise ValueError(f"Parameters look like NAME=VALUE, got {pair!r}")
        params[name.strip()] = float(value)
    return params


def _transport_reports(args: argparse.Namespace, params: dict[str, float]) -> tuple[list[tuple[str, TransportReport]], float]:
    """(parameter label, report) per field and the tolerance that applies."""
    config = get_config()
    rng = np.random.default_rng(args.seed)
    reports: list[tuple[str, TransportReport]] = []

    if args.target in MVN_TARGETS:
        dims = args.dims or 2
        factor = CholeskyFactor.random(dims, rng)
        mean = rng.standard_normal(dims)
        kind = MVN_TARGETS[args.target]
        for a in range(dims):
            reports.append((f"mu_{a}", mvn_transport_residual(
                factor, (a,), kind, mean=mean, n_points=args.points, seed=args.seed
            )))
        for a, b in factor.lower_indices():
            reports.append((f"L_{a}_{b}", mvn_transport_residual(
                factor, (a, b), kind, mean=mean, n_points=args.points, seed=args.seed
            )))
        tolerance = float(config.get("transport", "mvn_tolerance", default=1e-4))

    elif args.target == "dirichlet":
        alpha = rng.uniform(0.5, 3.0, args.dims or 3)
        for j in range(alpha.shape[0]):
            reports.append((f"alpha_{j}", dirichlet_transport_residual(
                alpha, j, n_points=args.points, seed=args.seed
            )))
        tolerance = float(config.get("transport", "dirichlet_tolerance", default=1e-3))

    else:
        dist = DistributionRegistry.get(args.target, **params)
        for name in dist.param_names:
            reports.append((name, univariate_transport_residual(dist, name, n_points=args.points)))
        tolerance = float(config.get("transport", "univariate_tolerance", default=1e-5))

    return reports, tolerance if args.tolerance is None else args.tolerance


def cmd_check_transport(args: argparse.Namespace) -> int:
    """Execute check-transport command.

    Args:
        args: Parsed arguments

    Returns:
        Exit code
    """
    params = _parse_params(args.param)
    reports, tolerance = _transport_reports(args, params)
    records = [
        {
            "target": args.target,
            "parameter": label,
            "max_residual": report.max_residual,
            "mean_residual": report.mean_residual,
            "n_points": report.n_points,
        }
        for label, report in reports
    ]
    run = _run_config(args, target=args.target, dims=args.dims, points=args.points, params=params)
    write_table(records, TRANSPORT_COLUMNS, args.seed, config_hash(run), args.out)

    worst = max(report.max_residual for _, report in reports)
    mean = float(np.mean([report.mean_residual for _, report in reports]))
    logger.info(f"{args.target}: max residual {worst:.3e}, mean {mean:.3e} (tolerance {tolerance:.1e})")
    if not worst <= tolerance:
        logger.error("Transport residual above tolerance")
        return EXIT_THRESHOLD
    return EXIT_OK


def cmd_bench_variance(args: argparse.Namespace) -> int:
    """Execute bench-variance command.

    Args:
        args: Parsed arguments

    Returns:
        Exit code
    """
    cfg, table = run_experiment(
        args.experiment,
        sweep=args.sweep,
        samples=args.samples,
        seed=args.seed,
        dims=args.dims,
        categories=args.categories,
        function=args.function,
        workers=args.workers,
    )
    run = _run_config(
        args,
        target=cfg.experiment,
        samples=cfg.samples,
        sweep=str(cfg.sweep),
        dims=cfg.dims,
        function=cfg.function,
    )
    write_table(table.records(), table.columns(), cfg.seed, config_hash(run), args.out)
    logger.info(f"{cfg.experiment}: {len(table)} rows")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
