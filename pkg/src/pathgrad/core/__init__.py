"""Core numerics: exceptions, constants and special functions."""

from pathgrad.core.exceptions import (
    AsymmetryError,
    CoefficientFileError,
    ConvergenceError,
    DomainError,
    FitFailureError,
    PathgradError,
    RichardsonError,
    SimplexError,
    SingularCholeskyError,
    SingularDensityError,
    UnsupportedDistributionError,
)
from pathgrad.core.specfun import (
    SpecFunResult,
    digamma,
    log_beta,
    log_gamma,
    reg_inc_beta,
    reg_inc_beta_result,
    reg_inc_beta_upper,
    reg_inc_gamma,
    reg_inc_gamma_result,
    reg_inc_gamma_upper,
    std_normal_cdf,
    std_normal_pdf,
    std_normal_ppf,
    trigamma,
)

__all__ = [
    # Exceptions
    "PathgradError",
    "DomainError",
    "SimplexError",
    "AsymmetryError",
    "SingularCholeskyError",
    "SingularDensityError",
    "ConvergenceError",
    "RichardsonError",
    "FitFailureError",
    "CoefficientFileError",
    "UnsupportedDistributionError",
    # Special functions
    "SpecFunResult",
    "log_gamma",
    "digamma",
    "trigamma",
    "log_beta",
    "reg_inc_gamma",
    "reg_inc_gamma_result",
    "reg_inc_gamma_upper",
    "reg_inc_beta",
    "reg_inc_beta_result",
    "reg_inc_beta_upper",
    "std_normal_cdf",
    "std_normal_pdf",
    "std_normal_ppf",
]
