"""Monte Carlo gradient estimators, variance tables and transport checks."""

from pathgrad.estimators.finite_difference import FiniteDifferenceResult, fd_expectation_gradient
from pathgrad.estimators.models import EstimatorKind, GradientEstimate, RunningMoments, TestFunction
from pathgrad.estimators.pathwise import pathwise_gradient, score_function_gradient
from pathgrad.estimators.saddlepoint import CGF, gamma_cgf, lugannani_rice_cdf, normal_cgf, solve_saddlepoint
from pathgrad.estimators.sources import (
    DirichletSource,
    GradientSource,
    MVNSource,
    StudentTSource,
    UnivariateSource,
)
from pathgrad.estimators.transport import (
    TransportReport,
    dirichlet_transport_residual,
    mvn_transport_residual,
    transport_residual,
    univariate_transport_residual,
)
from pathgrad.estimators.variance import (
    EstimatorSpec,
    SweepSpec,
    VarianceRow,
    VarianceTable,
    variance_profile,
)

__all__ = [
    # Models
    "EstimatorKind",
    "GradientEstimate",
    "RunningMoments",
    "TestFunction",
    # Sources
    "GradientSource",
    "UnivariateSource",
    "StudentTSource",
    "DirichletSource",
    "MVNSource",
    # Estimators
    "pathwise_gradient",
    "score_function_gradient",
    "fd_expectation_gradient",
    "FiniteDifferenceResult",
    # Variance
    "EstimatorSpec",
    "SweepSpec",
    "VarianceRow",
    "VarianceTable",
    "variance_profile",
    # Transport
    "TransportReport",
    "transport_residual",
    "univariate_transport_residual",
    "mvn_transport_residual",
    "dirichlet_transport_residual",
    # Saddlepoint
    "CGF",
    "normal_cgf",
    "gamma_cgf",
    "lugannani_rice_cdf",
    "solve_saddlepoint",
]
