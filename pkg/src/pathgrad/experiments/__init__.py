"""Accuracy grids and variance experiments behind the command-line harness."""

from pathgrad.experiments.accuracy import AccuracyReport, accuracy_grid, verify_accuracy
from pathgrad.experiments.benchmarks import (
    EXPERIMENTS,
    ExperimentConfig,
    experiment_config,
    linear_closed_form_variances,
    run_experiment,
)

__all__ = [
    "AccuracyReport",
    "accuracy_grid",
    "verify_accuracy",
    "EXPERIMENTS",
    "ExperimentConfig",
    "experiment_config",
    "linear_closed_form_variances",
    "run_experiment",
]
