"""pathgrad - Pathwise gradient estimators built on optimal transport.

Implicit-differentiation pathwise derivatives for Gamma, Beta, Dirichlet,
mixture and Student's t distributions, optimal-transport velocity fields for
the multivariate Normal, a finite-difference oracle, and Monte Carlo
estimators with variance benchmarks.
"""

__version__ = "0.1.0"

# Config exports
from pathgrad.config import Config, get_config, set_config

# Core exports
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

# Estimators
from pathgrad.estimators import (
    DirichletSource,
    GradientEstimate,
    MVNSource,
    StudentTSource,
    SweepSpec,
    TestFunction,
    UnivariateSource,
    fd_expectation_gradient,
    pathwise_gradient,
    score_function_gradient,
    variance_profile,
)

# Multivariate Normal
from pathgrad.mvn import CholeskyFactor, VelocityKind, omt_velocity, rt_velocity, velocity_field
from pathgrad.oracle import oracle_dz_dtheta

# Shape derivatives
from pathgrad.shape_grad import beta_dz_dalpha, beta_dz_dbeta, dirichlet_dz_dalpha, gamma_dz_dalpha

# Univariate families
from pathgrad.univariate import (
    Beta,
    Gamma,
    MixtureDistribution,
    Normal,
    StudentT,
    SymmetricBeta,
    TruncatedUnitNormal,
    pathwise_dz_dtheta,
)

__all__ = [
    "__version__",
    # Config
    "Config",
    "get_config",
    "set_config",
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
    # Shape derivatives
    "gamma_dz_dalpha",
    "beta_dz_dalpha",
    "beta_dz_dbeta",
    "dirichlet_dz_dalpha",
    "oracle_dz_dtheta",
    # Univariate
    "Normal",
    "TruncatedUnitNormal",
    "Gamma",
    "Beta",
    "SymmetricBeta",
    "MixtureDistribution",
    "StudentT",
    "pathwise_dz_dtheta",
    # Multivariate Normal
    "CholeskyFactor",
    "VelocityKind",
    "velocity_field",
    "rt_velocity",
    "omt_velocity",
    # Estimators
    "GradientEstimate",
    "TestFunction",
    "UnivariateSource",
    "StudentTSource",
    "DirichletSource",
    "MVNSource",
    "pathwise_gradient",
    "score_function_gradient",
    "fd_expectation_gradient",
    "SweepSpec",
    "variance_profile",
]
