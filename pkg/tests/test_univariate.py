"""Tests for the univariate families and the master formula."""

import math

import numpy as np
import pytest

from pathgrad.core.exceptions import DomainError, SingularDensityError, UnsupportedDistributionError
from pathgrad.oracle import oracle_dz_dtheta
from pathgrad.univariate import (
    Beta,
    DerivativeKind,
    DistributionRegistry,
    Gamma,
    MixtureDistribution,
    Normal,
    StudentT,
    SymmetricBeta,
    TruncatedUnitNormal,
    mixture_dz_dlogit,
    mixture_dz_dtheta,
    pathwise_dz_dtheta,
    student_t_compose,
    student_t_pathwise_sample,
    truncated_normal_dz_dkappa,
)


class TestRegistry:
    """Test the distribution registry."""

    def test_registered_names(self):
        names = DistributionRegistry.list_names()
        for name in ("normal", "truncated-normal", "gamma", "beta", "symmetric-beta", "student-t"):
            assert name in names

    def test_get_with_params(self):
        dist = DistributionRegistry.get("gamma", alpha=2.0, beta=3.0)
        assert isinstance(dist, Gamma)
        assert dist.theta == (2.0, 3.0)

    def test_unknown_name(self):
        with pytest.raises(UnsupportedDistributionError):
            DistributionRegistry.get("weibull")


class TestParameters:
    """Test parameter bookkeeping shared by every family."""

    def test_param_index(self):
        dist = Beta(2.0, 3.0)
        assert dist.param_index("beta") == 1
        assert dist.param_index(0) == 0
        with pytest.raises(KeyError):
            dist.param_index("gamma")
        with pytest.raises(IndexError):
            dist.param_index(2)

    def test_with_param_copies(self):
        dist = Normal(0.0, 1.0)
        moved = dist.with_param(0, 2.5)
        assert moved.mu == 2.5
        assert dist.mu == 0.0

    def test_invalid_parameters(self):
        with pytest.raises(DomainError):
            Normal(0.0, -1.0)
        with pytest.raises(DomainError):
            Gamma(0.0, 1.0)
        with pytest.raises(DomainError):
            TruncatedUnitNormal(-0.5)
        with pytest.raises(ValueError):
            Gamma(1.0, 1.0, mode="exact")

    def test_derivative_kinds(self):
        assert Normal().derivative_kind == DerivativeKind.ANALYTIC
        assert Gamma().derivative_kind == DerivativeKind.APPROX
        assert Beta(mode="oracle").derivative_kind == DerivativeKind.ORACLE
        assert StudentT(3.0).derivative_kind == DerivativeKind.ORACLE


class TestMasterFormula:
    """Test pathwise_dz_dtheta on analytic and approximate families."""

    def test_normal_closed_form(self):
        dist = Normal(0.5, 2.0)
        assert pathwise_dz_dtheta(dist, 1.3, "mu") == pytest.approx(1.0)
        assert pathwise_dz_dtheta(dist, 1.3, "sigma") == pytest.approx(0.4)

    def test_gamma_approx_matches_oracle_mode(self):
        approx = Gamma(2.0, 1.5)
        oracle = Gamma(2.0, 1.5, mode="oracle")
        for index in (0, 1):
            assert pathwise_dz_dtheta(approx, 0.3, index) == pytest.approx(
                pathwise_dz_dtheta(oracle, 0.3, index), rel=1e-5
            )

    def test_beta_approx_matches_oracle_mode(self):
        approx = Beta(2.0, 4.0)
        oracle = Beta(2.0, 4.0, mode="oracle")
        for index in (0, 1):
            assert pathwise_dz_dtheta(approx, 0.3, index) == pytest.approx(
                pathwise_dz_dtheta(oracle, 0.3, index), rel=1e-5
            )

    def test_symmetric_beta_ties_shapes(self):
        z = 0.3
        expected = -z * math.log(z) + (1 - z) * math.log(1 - z)
        assert pathwise_dz_dtheta(SymmetricBeta(1.0), z, 0) == pytest.approx(expected, rel=1e-6)

    def test_array_input(self):
        z = np.array([0.2, 0.5, 1.1])
        out = pathwise_dz_dtheta(Normal(0.0, 2.0), z, 1)
        np.testing.assert_allclose(out, z / 2.0)

    def test_outside_support(self):
        with pytest.raises(DomainError):
            pathwise_dz_dtheta(Beta(2.0, 2.0), 1.5, 0)
        with pytest.raises(DomainError):
            pathwise_dz_dtheta(Gamma(2.0, 1.0), -0.1, 0)

    def test_vanishing_density(self):
        with pytest.raises(SingularDensityError):
            pathwise_dz_dtheta(Normal(0.0, 1.0), 50.0, 0)


class TestTruncatedNormal:
    """Test the Normal truncated to [0, κ]."""

    def test_endpoints(self):
        assert truncated_normal_dz_dkappa(0.0, 1.3) == pytest.approx(0.0, abs=1e-15)
        assert truncated_normal_dz_dkappa(1.3, 1.3) == 1.0

    def test_matches_oracle(self):
        dist = TruncatedUnitNormal(1.3)
        z = np.array([0.2, 0.6, 1.1])
        np.testing.assert_allclose(pathwise_dz_dtheta(dist, z, 0), oracle_dz_dtheta(dist, z, 0), rtol=1e-6)

    def test_quantile_round_trip(self):
        dist = TruncatedUnitNormal(2.0)
        u = np.array([0.1, 0.5, 0.9])
        np.testing.assert_allclose(dist.cdf(dist.ppf(u)), u, rtol=1e-12)

    def test_domain(self):
        with pytest.raises(DomainError):
            truncated_normal_dz_dkappa(1.5, 1.0)
        with pytest.raises(DomainError):
            truncated_normal_dz_dkappa(0.5, 0.0)


class TestMixture:
    """Test finite mixtures."""

    def _mixture(self):
        return MixtureDistribution.from_weights([Normal(0.0, 1.0), Normal(1.0, 1.0)], [0.3, 0.7])

    def test_weights_and_names(self):
        mix = self._mixture()
        assert mix.weights == pytest.approx([0.3, 0.7])
        assert mix.param_names == ("mu_0", "sigma_0", "mu_1", "sigma_1", "logit_0")
        assert mix.logits[0] == pytest.approx(math.log(0.3 / 0.7))

    def test_location_closed_form(self):
        mix = self._mixture()
        z = 0.4
        q = mix.pdf(z)
        for k, comp in enumerate(mix.components):
            expected = mix.weights[k] * comp.pdf(z) / q
            assert mixture_dz_dtheta(mix, z, (k, "mu")) == pytest.approx(expected, rel=1e-12)
            assert pathwise_dz_dtheta(mix, z, f"mu_{k}") == pytest.approx(expected, rel=1e-12)

    def test_locations_sum_to_translation(self):
        mix = self._mixture()
        z = np.array([-1.0, 0.4, 2.0])
        total = mixture_dz_dtheta(mix, z, (0, "mu")) + mixture_dz_dtheta(mix, z, (1, "mu"))
        np.testing.assert_allclose(total, 1.0, rtol=1e-12)

    def test_logit_derivative(self):
        mix = self._mixture()
        z = 0.4
        pi0 = mix.weights[0]
        f0 = mix.components[0].cdf(z)
        expected = -pi0 * (f0 - mix.cdf(z)) / mix.pdf(z)
        assert mixture_dz_dlogit(mix, z, 0) == pytest.approx(expected, rel=1e-12)

    def test_logit_matches_oracle(self):
        mix = self._mixture()
        z = np.array([-0.5, 0.4, 1.5])
        np.testing.assert_allclose(mixture_dz_dlogit(mix, z, 0), oracle_dz_dtheta(mix, z, 4), rtol=1e-6)

    def test_identical_components_have_flat_logits(self):
        mix = MixtureDistribution((Normal(), Normal()), (0.3,))
        assert mixture_dz_dlogit(mix, 0.7, 0) == pytest.approx(0.0, abs=1e-15)

    def test_pinned_logit(self):
        with pytest.raises(IndexError):
            mixture_dz_dlogit(self._mixture(), 0.0, 1)

    def test_quantile_round_trip(self):
        mix = self._mixture()
        u = np.array([0.05, 0.5, 0.95])
        np.testing.assert_allclose(mix.cdf(mix.ppf(u)), u, rtol=1e-10)

    def test_sampling_is_seeded(self):
        mix = self._mixture()
        a = mix.sample(np.random.default_rng(3), 100)
        b = mix.sample(np.random.default_rng(3), 100)
        np.testing.assert_array_equal(a, b)

    def test_invalid_construction(self):
        with pytest.raises(DomainError):
            MixtureDistribution((Normal(), Normal()), ())
        with pytest.raises(DomainError):
            MixtureDistribution.from_weights([Normal(), Normal()], [0.5, 0.6])


class TestStudentT:
    """Test the Gamma-Normal composition for Student's t."""

    def test_compose_matches_finite_difference(self):
        dist = StudentT(3.0)
        noise = np.array([[0.3, 0.8], [0.7, -1.2]])
        _, dz = dist.compose(noise)
        h = 1e-5
        z_up, _ = StudentT(3.0 + h).compose(noise)
        z_down, _ = StudentT(3.0 - h).compose(noise)
        np.testing.assert_allclose(dz, (z_up - z_down) / (2 * h), rtol=1e-3)

    @pytest.mark.slow
    def test_samples_follow_t(self):
        z, dz = student_t_pathwise_sample(5.0, np.random.default_rng(0), 20000)
        assert z.shape == dz.shape == (20000,)
        # Var t_5 = 5/3
        assert np.var(z) == pytest.approx(5.0 / 3.0, rel=0.1)

    def test_compose_zero_noise(self):
        z, dz = student_t_compose(4.0, 1.0, 0.0)
        assert z == 0.0
        assert dz == 0.0

    def test_score_matches_log_density(self):
        dist = StudentT(2.5)
        z = np.array([-1.0, 0.3, 2.0])
        h = 1e-6
        numeric = (StudentT(2.5 + h).logpdf(z) - StudentT(2.5 - h).logpdf(z)) / (2 * h)
        np.testing.assert_allclose(dist.score(z, 0), numeric, rtol=1e-6, atol=1e-8)

    def test_invalid_nu(self):
        with pytest.raises(DomainError):
            StudentT(0.0)
        with pytest.raises(DomainError):
            student_t_pathwise_sample(-1.0, np.random.default_rng(0))
