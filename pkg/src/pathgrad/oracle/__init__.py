"""Finite-difference oracle for CDF derivatives.

The rational-surface fitter lives in ``pathgrad.oracle.fitting`` and is
imported on demand.
"""

from pathgrad.oracle.models import (
    FitSpec,
    OracleConfig,
    OracleResult,
    OracleScheme,
    ValidationReport,
)
from pathgrad.oracle.oracle import (
    dual_scheme_dcdf_dtheta,
    oracle_dcdf_dtheta,
    oracle_dcdf_dtheta_result,
    oracle_dz_dtheta,
    tail_cdf_derivative,
)
from pathgrad.oracle.reference import (
    beta_dz_dalpha_reference,
    beta_dz_dbeta_reference,
    gamma_dz_dalpha_reference,
)
from pathgrad.oracle.richardson import parameter_step, richardson_central_difference

__all__ = [
    "OracleConfig",
    "OracleResult",
    "OracleScheme",
    "FitSpec",
    "ValidationReport",
    "oracle_dcdf_dtheta",
    "oracle_dcdf_dtheta_result",
    "oracle_dz_dtheta",
    "dual_scheme_dcdf_dtheta",
    "tail_cdf_derivative",
    "gamma_dz_dalpha_reference",
    "beta_dz_dalpha_reference",
    "beta_dz_dbeta_reference",
    "parameter_step",
    "richardson_central_difference",
]
