"""Fast pathwise derivatives for Gamma, Beta and Dirichlet shape parameters."""

from pathgrad.shape_grad.beta import BETA_DZ_DALPHA, beta_dz_dalpha, beta_dz_dbeta, beta_region_ids
from pathgrad.shape_grad.dirichlet import (
    dirichlet_dz_dalpha,
    dirichlet_jacobian,
    dirichlet_velocity_contraction,
    marginal_factors,
)
from pathgrad.shape_grad.gamma import (
    GAMMA_DZ_DALPHA,
    gamma_dz_dalpha,
    gamma_dz_dparams,
    gamma_region_ids,
    stirling_factor,
)
from pathgrad.shape_grad.rational import MONOMIAL_ORDER, RationalSurface, design_matrix, monomial_exponents
from pathgrad.shape_grad.regions import FormulaKind, Region, RegionedApprox
from pathgrad.shape_grad.registry import SurfaceRegistry, get_registry, set_registry

__all__ = [
    # Regions
    "FormulaKind",
    "Region",
    "RegionedApprox",
    # Rational surfaces
    "MONOMIAL_ORDER",
    "RationalSurface",
    "design_matrix",
    "monomial_exponents",
    "SurfaceRegistry",
    "get_registry",
    "set_registry",
    # Gamma
    "GAMMA_DZ_DALPHA",
    "gamma_dz_dalpha",
    "gamma_dz_dparams",
    "gamma_region_ids",
    "stirling_factor",
    # Beta
    "BETA_DZ_DALPHA",
    "beta_dz_dalpha",
    "beta_dz_dbeta",
    "beta_region_ids",
    # Dirichlet
    "dirichlet_dz_dalpha",
    "dirichlet_jacobian",
    "dirichlet_velocity_contraction",
    "marginal_factors",
]
