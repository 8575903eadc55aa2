"""Default configuration values."""

from __future__ import annotations

DEFAULT_CONFIG = {
    "oracle": {
        "quadrature_abs_tol": 1e-12,
        "fd_base_step": 1e-4,
        "richardson_levels": 4,
    },
    "specfun": {
        "max_terms": 1000,
    },
    # Rational-surface coefficient files written by `pathgrad fit-rational`
    "coefficients": {
        "directory": "coefficients",
        "fallback": "oracle",
    },
    "estimators": {
        "samples": 100_000,
        "seed": 0,
        "workers": 1,
        "chunk_size": 10_000,
        "fd_step": 1e-3,
        "fd_max_retries": 3,
    },
    "transport": {
        "step": 1e-5,
        "points": 200,
        "mvn_tolerance": 1e-4,
        "dirichlet_tolerance": 1e-3,
        "univariate_tolerance": 1e-5,
    },
    "accuracy": {
        "points": 400,
        "gamma_threshold": 1e-3,
        "beta_threshold": 2e-3,
    },
    "experiments": {
        "beta_cubic": {"sweep": "0.3:10:8:log", "samples": 100_000},
        "dirichlet_elbo": {"sweep": "0.01:100:5:log", "samples": 10_000, "categories": 50},
        "mvn_synthetic": {"sweep": "0.1:1:5:linear", "samples": 10_000, "dims": 50},
        "bivariate_cos": {"sweep": "-1.5:1.5:11:linear", "samples": 100_000},
        "mixture_quartic": {"sweep": "-3:3:7:linear", "samples": 100_000},
        "linear_closed_form": {"sweep": "0:0:1:linear", "samples": 1_000_000, "dims": 20},
    },
}
