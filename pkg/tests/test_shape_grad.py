"""Tests for the Gamma, Beta and Dirichlet shape derivatives."""

import logging
import math

import numpy as np
import pytest
from scipy import stats

from pathgrad.core.exceptions import CoefficientFileError, DomainError, SimplexError
from pathgrad.io.coefficients import write_coefficient_file
from pathgrad.oracle.reference import beta_dz_dalpha_reference, beta_dz_dbeta_reference, gamma_dz_dalpha_reference
from pathgrad.shape_grad import (
    RationalSurface,
    SurfaceRegistry,
    beta_dz_dalpha,
    beta_dz_dbeta,
    beta_region_ids,
    dirichlet_dz_dalpha,
    dirichlet_jacobian,
    dirichlet_velocity_contraction,
    gamma_dz_dalpha,
    gamma_dz_dparams,
    gamma_region_ids,
    set_registry,
)
from pathgrad.shape_grad.regions import FormulaKind, Region, RegionedApprox


class TestRegionedApprox:
    """Test first-match region assignment."""

    def _approx(self):
        return RegionedApprox(
            "demo",
            [
                Region("small", FormulaKind.TAYLOR, lambda z: z < 1.0, lambda z: np.zeros_like(z)),
                Region("medium", FormulaKind.LR_FAR, lambda z: z < 2.0, lambda z: np.ones_like(z)),
                Region("rest", FormulaKind.RATIONAL, lambda z: np.ones(z.shape, dtype=bool), lambda z: 2.0 * z),
            ],
        )

    def test_first_match_wins(self):
        approx = self._approx()
        z = np.array([0.5, 1.5, 3.0])
        np.testing.assert_array_equal(approx.evaluate(z), [0.0, 1.0, 6.0])
        assert list(approx.labels(z)) == ["small", "medium", "rest"]

    def test_uncovered_point_raises(self):
        approx = RegionedApprox("partial", [Region("small", FormulaKind.TAYLOR, lambda z: z < 1.0, lambda z: z)])
        with pytest.raises(DomainError):
            approx.evaluate(np.array([0.5, 2.0]))

    def test_duplicate_ids_rejected(self):
        region = Region("a", FormulaKind.TAYLOR, lambda z: z > 0, lambda z: z)
        with pytest.raises(ValueError):
            RegionedApprox("dup", [region, region])


class TestGamma:
    """Test dz/dα for the Gamma distribution."""

    def test_taylor_matches_oracle(self):
        for z, alpha in [(0.1, 1.5), (0.05, 0.3), (0.3, 4.0)]:
            assert gamma_region_ids(z, alpha) == "taylor"
            assert gamma_dz_dalpha(z, alpha) == pytest.approx(gamma_dz_dalpha_reference(z, alpha), rel=1e-5)

    def test_saddlepoint_regions_match_oracle(self):
        for z, alpha in [(30.0, 50.0), (70.0, 50.0), (48.0, 50.0)]:
            assert gamma_region_ids(z, alpha) in ("lr_far", "lr_near")
            assert gamma_dz_dalpha(z, alpha) == pytest.approx(gamma_dz_dalpha_reference(z, alpha), rel=1e-2)

    def test_region_ids(self):
        assert gamma_region_ids(0.1, 2.0) == "taylor"
        assert gamma_region_ids(45.0, 50.0) == "lr_near"
        assert gamma_region_ids(30.0, 50.0) == "lr_far"
        assert gamma_region_ids(2.0, 3.0) == "rational"

    def test_rational_region_falls_back_to_oracle(self, caplog):
        with caplog.at_level(logging.WARNING):
            value = gamma_dz_dalpha(2.0, 3.0)
        assert value == pytest.approx(gamma_dz_dalpha_reference(2.0, 3.0), rel=1e-12)
        assert "fit-rational" in caplog.text

    def test_missing_surface_under_error_policy(self, temp_dir):
        set_registry(SurfaceRegistry(temp_dir, "error"))
        with pytest.raises(CoefficientFileError):
            gamma_dz_dalpha(2.0, 3.0)

    def test_loaded_surface_is_used(self, temp_dir):
        surface = RationalSurface(
            distribution="gamma",
            region_id="rational",
            transforms=("log_z_over_alpha", "log_alpha"),
            numerator_degrees=(0, 0),
            denominator_degrees=(0, 0),
            numerator=np.array([math.log(0.25)]),
            denominator=np.array([1.0]),
            prefactor="exp_ratio",
            fit_seed=0,
        )
        write_coefficient_file(surface, temp_dir / "gamma_rational.json")
        set_registry(SurfaceRegistry(temp_dir, "error"))
        assert gamma_dz_dalpha(2.0, 3.0) == pytest.approx(0.25)
        # other regions ignore the surface
        assert gamma_dz_dalpha(0.1, 2.0) != pytest.approx(0.25)

    def test_rate_parameter(self):
        d_alpha, d_beta = gamma_dz_dparams(1.0, 2.0, 2.0)
        assert d_alpha == pytest.approx(gamma_dz_dalpha(2.0, 2.0) / 2.0, rel=1e-12)
        assert d_beta == pytest.approx(-0.5)

    def test_positive_derivative(self):
        z = np.array([0.01, 0.3, 0.7])
        assert np.all(gamma_dz_dalpha(z, 1.0) > 0)

    def test_domain(self):
        with pytest.raises(DomainError):
            gamma_dz_dalpha(-1.0, 2.0)
        with pytest.raises(DomainError):
            gamma_dz_dalpha(1.0, 0.0)
        with pytest.raises(DomainError):
            gamma_dz_dalpha(float("nan"), 1.0)

    def test_scalar_and_array(self):
        assert isinstance(gamma_dz_dalpha(0.1, 2.0), float)
        assert gamma_dz_dalpha(np.array([0.1, 0.2]), 2.0).shape == (2,)


class TestBeta:
    """Test dz/dα and dz/dβ for the Beta distribution."""

    def test_uniform_closed_form(self):
        # Beta(1, 1): dz/dα = −z log z, dz/dβ = (1 − z) log(1 − z)
        for z in (0.3, 0.7):
            assert beta_dz_dalpha(z, 1.0, 1.0) == pytest.approx(-z * math.log(z), rel=1e-6)
            assert beta_dz_dbeta(z, 1.0, 1.0) == pytest.approx((1 - z) * math.log(1 - z), rel=1e-6)

    def test_region_ids(self):
        assert beta_region_ids(0.3, 1.0, 1.0) == "taylor"
        assert beta_region_ids(0.7, 1.0, 1.0) == "taylor_mirror"
        assert beta_region_ids(0.5, 20.0, 20.0) == "lr_near"
        assert beta_region_ids(0.3, 20.0, 20.0) == "lr_far"
        assert beta_region_ids(0.6, 3.0, 3.0) == "rational"

    def test_taylor_matches_oracle(self):
        for z, a, b in [(0.2, 1.0, 5.0), (0.1, 0.5, 2.5), (0.3, 2.0, 4.0)]:
            assert beta_region_ids(z, a, b) == "taylor"
            assert beta_dz_dalpha(z, a, b) == pytest.approx(beta_dz_dalpha_reference(z, a, b), rel=1e-5)

    def test_saddlepoint_matches_oracle(self):
        for z in (0.3, 0.5, 0.65):
            assert beta_dz_dalpha(z, 20.0, 20.0) == pytest.approx(beta_dz_dalpha_reference(z, 20.0, 20.0), rel=1e-2)

    def test_mirror_identity(self):
        z, a, b = 0.35, 2.0, 4.0
        assert beta_dz_dbeta(z, a, b) == pytest.approx(-beta_dz_dalpha(1 - z, b, a), rel=1e-14)

    def test_domain(self):
        for z in (0.0, 1.0, -0.1, 1.5):
            with pytest.raises(DomainError):
                beta_dz_dalpha(z, 1.0, 1.0)
        with pytest.raises(DomainError):
            beta_dz_dalpha(0.5, -1.0, 1.0)


def _near_mean(a, b, offsets=(0.0, -0.05, 0.05)):
    total = a + b
    sigma = math.sqrt(a * b) / (total * math.sqrt(total + 1.0))
    return [(a / total + k * sigma, a, b) for k in offsets]


def _quantiles(a, b, levels=(0.05, 0.3, 0.7, 0.95)):
    return [(float(stats.beta.ppf(q, a, b)), a, b) for q in levels]


BETA_REGION_GRID = {
    "taylor": [(0.2, 1.0, 5.0), (0.1, 0.5, 2.5), (0.05, 3.0, 20.0)],
    "taylor_mirror": [(0.9, 2.0, 0.5), (0.95, 8.0, 2.0), (0.8, 0.7, 1.5)],
    "lr_near": _near_mean(30.0, 7.0) + _near_mean(45.7, 44.4),
    "lr_far": _quantiles(30.0, 7.0) + _quantiles(45.7, 44.4) + _quantiles(7.0, 30.0),
    "rational": [(0.6, 3.0, 2.0), (0.35, 4.0, 9.0), (0.7, 10.0, 3.0)],
}


class TestBetaRegionAccuracy:
    """Test every Beta region on skewed shapes against the oracle."""

    @pytest.mark.parametrize(
        "region,z,a,b",
        [(region, *point) for region, points in BETA_REGION_GRID.items() for point in points],
    )
    def test_dz_dalpha(self, region, z, a, b):
        assert beta_region_ids(z, a, b) == region
        assert beta_dz_dalpha(z, a, b) == pytest.approx(beta_dz_dalpha_reference(z, a, b), rel=2e-3)

    @pytest.mark.parametrize("z,a,b", _quantiles(30.0, 7.0) + _quantiles(12.0, 60.0))
    def test_dz_dbeta_far_from_mean(self, z, a, b):
        assert beta_dz_dbeta(z, a, b) == pytest.approx(beta_dz_dbeta_reference(z, a, b), rel=2e-3)

    def test_vectorized_matches_pointwise(self):
        z, a, b = np.array(BETA_REGION_GRID["lr_far"][:4]).T
        np.testing.assert_allclose(beta_dz_dalpha(z, a, b), [beta_dz_dalpha(*p) for p in zip(z, a, b)], rtol=1e-12)

    def test_far_form_sign_matches_oracle(self):
        # dz/dα > 0 on both sides of the mean
        for z, a, b in _quantiles(30.0, 7.0, (0.01, 0.99)):
            assert beta_dz_dalpha(z, a, b) > 0

    def test_scalar_labels_are_str(self):
        assert type(beta_region_ids(0.3, 1.0, 1.0)) is str
        assert type(gamma_region_ids(0.1, 2.0)) is str
        assert beta_region_ids(np.array([0.3, 0.7]), 1.0, 1.0).dtype.kind == "U"


class TestDirichlet:
    """Test the Dirichlet velocity field."""

    z = np.array([0.2, 0.3, 0.5])
    alpha = np.array([1.0, 2.0, 3.0])

    def test_columns_sum_to_zero(self):
        for j in range(3):
            column = dirichlet_dz_dalpha(self.z, self.alpha, j)
            assert column.sum() == pytest.approx(0.0, abs=1e-14)

    def test_two_components_reduce_to_beta(self):
        z = np.array([0.3, 0.7])
        alpha = np.array([1.5, 2.5])
        column = dirichlet_dz_dalpha(z, alpha, 0)
        expected = beta_dz_dalpha(0.3, 1.5, 2.5)
        assert column[0] == pytest.approx(expected, rel=1e-12)
        assert column[1] == pytest.approx(-expected, rel=1e-12)

    def test_jacobian_columns(self):
        jac = dirichlet_jacobian(self.z, self.alpha)
        for j in range(3):
            np.testing.assert_allclose(jac[:, j], dirichlet_dz_dalpha(self.z, self.alpha, j), rtol=1e-12)

    def test_contraction_matches_jacobian(self):
        grad = np.array([1.0, -2.0, 0.5])
        expected = grad @ dirichlet_jacobian(self.z, self.alpha)
        np.testing.assert_allclose(dirichlet_velocity_contraction(self.z, self.alpha, grad), expected, rtol=1e-12)

    def test_oracle_factor_agrees(self):
        approx = dirichlet_dz_dalpha(self.z, self.alpha, 1)
        oracle = dirichlet_dz_dalpha(self.z, self.alpha, 1, factor="oracle")
        np.testing.assert_allclose(approx, oracle, rtol=1e-5)

    def test_batched_samples(self, rng):
        z = rng.dirichlet(self.alpha, size=5)
        z = z / z.sum(axis=1, keepdims=True)
        out = dirichlet_dz_dalpha(z, self.alpha, 2)
        assert out.shape == (5, 3)
        np.testing.assert_allclose(out.sum(axis=1), 0.0, atol=1e-12)

    def test_off_simplex(self):
        with pytest.raises(SimplexError):
            dirichlet_dz_dalpha(np.array([0.2, 0.3, 0.6]), self.alpha, 0)
        with pytest.raises(SimplexError):
            dirichlet_dz_dalpha(np.array([1.0]), np.array([1.0]), 0)
        with pytest.raises(SimplexError):
            dirichlet_dz_dalpha(np.array([0.0, 0.5, 0.5]), self.alpha, 0)

    def test_bad_parameters(self):
        with pytest.raises(DomainError):
            dirichlet_dz_dalpha(self.z, np.array([1.0, -1.0, 1.0]), 0)
        with pytest.raises(IndexError):
            dirichlet_dz_dalpha(self.z, self.alpha, 3)
