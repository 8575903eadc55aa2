"""Velocity fields for the Cholesky-parameterized multivariate Normal."""

from pathgrad.mvn.cholesky import CholeskyFactor
from pathgrad.mvn.linalg import SymEig, solve_symmetric_sylvester, sym_eig
from pathgrad.mvn.velocity import (
    VelocityField,
    VelocityKind,
    cholesky_score,
    kinetic_energy,
    kinetic_energy_mc,
    mean_score,
    mu_field,
    mu_velocity,
    omt_contraction,
    omt_velocity,
    omt_velocity_whitened,
    random_antisymmetric,
    rotation_contraction,
    rotation_control_variate,
    rt_contraction,
    rt_velocity,
    velocity_field,
    whitened_potential,
)

__all__ = [
    "CholeskyFactor",
    "SymEig",
    "sym_eig",
    "solve_symmetric_sylvester",
    "VelocityField",
    "VelocityKind",
    "velocity_field",
    "mu_field",
    "rt_velocity",
    "omt_velocity",
    "omt_velocity_whitened",
    "whitened_potential",
    "rotation_control_variate",
    "random_antisymmetric",
    "mu_velocity",
    "kinetic_energy",
    "kinetic_energy_mc",
    "rt_contraction",
    "omt_contraction",
    "rotation_contraction",
    "cholesky_score",
    "mean_score",
]
