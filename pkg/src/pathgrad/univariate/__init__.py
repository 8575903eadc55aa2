"""Univariate distributions and the master-formula pathwise derivative."""

from pathgrad.univariate.base import DerivativeKind, DistributionRegistry, ScalarDistribution
from pathgrad.univariate.families import Beta, Gamma, Normal, SymmetricBeta, TruncatedUnitNormal
from pathgrad.univariate.master import pathwise_dz_dtheta, truncated_normal_dz_dkappa
from pathgrad.univariate.mixture import MixtureDistribution, mixture_dz_dlogit, mixture_dz_dtheta
from pathgrad.univariate.student_t import StudentT, student_t_compose, student_t_pathwise_sample

__all__ = [
    "DerivativeKind",
    "DistributionRegistry",
    "ScalarDistribution",
    "Normal",
    "TruncatedUnitNormal",
    "Gamma",
    "Beta",
    "SymmetricBeta",
    "MixtureDistribution",
    "StudentT",
    "pathwise_dz_dtheta",
    "truncated_normal_dz_dkappa",
    "mixture_dz_dtheta",
    "mixture_dz_dlogit",
    "student_t_compose",
    "student_t_pathwise_sample",
]
