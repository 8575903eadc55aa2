"""Tests for the Monte Carlo gradient estimators."""

import numpy as np
import pytest

from pathgrad.core.exceptions import DomainError
from pathgrad.estimators import (
    DirichletSource,
    EstimatorKind,
    GradientEstimate,
    MVNSource,
    RunningMoments,
    StudentTSource,
    TestFunction,
    UnivariateSource,
    fd_expectation_gradient,
    pathwise_gradient,
    score_function_gradient,
)
from pathgrad.estimators.sampling import accumulate, shard_sizes
from pathgrad.estimators.test_functions import (
    beta_cubic_exact,
    component_power,
    constant,
    cosine,
    dirichlet_entropy_gradient,
    linear,
    mvn_cosine,
    power,
    quadratic,
    quartic,
)
from pathgrad.mvn import CholeskyFactor
from pathgrad.univariate import Beta, Gamma, Normal, StudentT, SymmetricBeta


def _within(estimate, exact, sigmas=4.0, floor=1e-12):
    """Every component of ``estimate`` within ``sigmas`` standard errors of ``exact``."""
    gap = np.abs(estimate.mean - np.asarray(exact, dtype=float))
    return np.all(gap <= sigmas * estimate.standard_error + floor)


class TestRunningMoments:
    """Test streaming moments."""

    def test_chunked_matches_numpy(self, rng):
        data = rng.standard_normal((1000, 3))
        moments = RunningMoments()
        for block in np.array_split(data, 7):
            moments.update(block)
        assert moments.count == 1000
        np.testing.assert_allclose(moments.mean, data.mean(axis=0), rtol=1e-12)
        np.testing.assert_allclose(moments.variance, data.var(axis=0, ddof=1), rtol=1e-10)

    def test_merge(self, rng):
        data = rng.standard_normal((200, 2))
        left, right, whole = RunningMoments(), RunningMoments(), RunningMoments()
        left.update(data[:50])
        right.update(data[50:])
        whole.update(data)
        left.merge(right)
        np.testing.assert_allclose(left.mean, whole.mean, rtol=1e-12)
        np.testing.assert_allclose(left.variance, whole.variance, rtol=1e-12)

    def test_variance_needs_two_samples(self):
        moments = RunningMoments()
        moments.update(np.array([1.0]))
        with pytest.raises(ValueError):
            _ = moments.variance


class TestGradientEstimate:
    """Test the estimate value type."""

    def _estimate(self):
        return GradientEstimate(
            kind=EstimatorKind.PATHWISE,
            parameters=("a", "b"),
            mean=np.array([1.0, 2.0]),
            variance=np.array([4.0, 9.0]),
            n_samples=100,
            seed=3,
            label="pathwise",
        )

    def test_summaries(self):
        est = self._estimate()
        np.testing.assert_allclose(est.standard_error, [0.2, 0.3])
        assert est.total_variance == pytest.approx(13.0)
        assert est.component("b") == (2.0, pytest.approx(0.3))

    def test_to_dict(self):
        record = self._estimate().to_dict()
        assert record["kind"] == "pathwise"
        assert record["parameters"] == ["a", "b"]
        assert record["n_samples"] == 100

    def test_needs_two_samples(self):
        with pytest.raises(ValueError):
            GradientEstimate(EstimatorKind.SCORE, ("a",), np.zeros(1), np.zeros(1), 1, 0)


class TestSampling:
    """Test sharded accumulation."""

    def test_shard_sizes(self):
        assert shard_sizes(10, 3) == [4, 3, 3]
        assert sum(shard_sizes(1001, 4)) == 1001

    def test_reproducible(self):
        def noise(rng, n):
            return rng.standard_normal(n)

        def terms(x):
            return x[:, None]

        a = accumulate(noise, terms, 1000, seed=5, workers=2, chunk_size=64)
        b = accumulate(noise, terms, 1000, seed=5, workers=2, chunk_size=64)
        assert a.count == 1000
        np.testing.assert_array_equal(a.mean, b.mean)
        np.testing.assert_array_equal(a.variance, b.variance)

    def test_rejects_bad_sizes(self):
        with pytest.raises(ValueError):
            accumulate(lambda rng, n: rng.standard_normal(n), lambda x: x, 1, seed=0)
        with pytest.raises(ValueError):
            accumulate(lambda rng, n: rng.standard_normal(n), lambda x: x, 10, seed=0, workers=-1)


class TestUnivariateEstimators:
    """Test pathwise and score estimators on univariate families."""

    def test_normal_location_is_noiseless(self):
        source = UnivariateSource(Normal(0.3, 2.0), ["mu"])
        est = pathwise_gradient(source, power(1), 100, seed=0)
        assert est.mean[0] == pytest.approx(1.0)
        assert est.variance[0] == pytest.approx(0.0, abs=1e-20)
        assert est.parameters == ("mu",)

    def test_normal_second_moment(self):
        # E[z²] = μ² + σ², gradient (2μ, 2σ)
        source = UnivariateSource(Normal(0.5, 1.5))
        exact = [1.0, 3.0]
        pathwise = pathwise_gradient(source, power(2), 20_000, seed=1)
        score = score_function_gradient(source, power(2), 20_000, seed=1)
        assert _within(pathwise, exact)
        assert _within(score, exact)
        assert pathwise.total_variance < score.total_variance

    def test_gamma_shape(self):
        # E[z] = α/β for rate β
        source = UnivariateSource(Gamma(2.0, 1.0))
        est = pathwise_gradient(source, power(1), 2000, seed=2)
        assert _within(est, [1.0, -2.0])

    def test_symmetric_beta_cubic(self):
        source = UnivariateSource(SymmetricBeta(2.0))
        est = pathwise_gradient(source, power(3), 20_000, seed=3)
        assert _within(est, [beta_cubic_exact(2.0)])

    def test_student_t_second_moment(self):
        # E[z²] = ν/(ν − 2), derivative −2/(ν − 2)²
        source = StudentTSource(StudentT(8.0))
        est = pathwise_gradient(source, power(2), 20_000, seed=4)
        assert _within(est, [-2.0 / 36.0])

    def test_constant_function_has_zero_gradient(self):
        est = pathwise_gradient(UnivariateSource(Normal()), constant(), 50, seed=0)
        np.testing.assert_array_equal(est.mean, [0.0, 0.0])

    def test_seed_reproducibility(self):
        source = UnivariateSource(Normal(0.0, 1.0))
        a = pathwise_gradient(source, cosine(), 500, seed=9)
        b = pathwise_gradient(source, cosine(), 500, seed=9)
        c = pathwise_gradient(source, cosine(), 500, seed=10)
        np.testing.assert_array_equal(a.mean, b.mean)
        assert not np.array_equal(a.mean, c.mean)

    def test_chunking_does_not_change_samples(self):
        source = UnivariateSource(Normal(0.2, 1.1))
        a = pathwise_gradient(source, cosine(), 600, seed=1, chunk_size=100)
        b = pathwise_gradient(source, cosine(), 600, seed=1, chunk_size=600)
        np.testing.assert_allclose(a.mean, b.mean, rtol=1e-12)


class TestDirichletEstimators:
    """Test the Dirichlet source."""

    def test_first_component_mean(self):
        # E[z_0] = α_0/α_tot
        alpha = np.array([1.0, 2.0, 3.0])
        source = DirichletSource(alpha)
        est = pathwise_gradient(source, component_power(0, 1), 5000, seed=0)
        assert _within(est, np.array([5.0, -1.0, -1.0]) / 36.0)
        assert est.parameters == ("alpha_0", "alpha_1", "alpha_2")

    def test_samples_on_simplex(self, rng):
        source = DirichletSource([0.5, 1.0, 2.0])
        z = source.transform(source.noise(rng, 100))
        np.testing.assert_allclose(z.sum(axis=1), 1.0, rtol=1e-14)
        assert np.all(z > 0)

    def test_entropy_gradient_matches_finite_difference(self):
        from scipy import stats

        alpha = np.array([0.7, 1.5, 2.5])
        h = 1e-6
        numeric = []
        for j in range(3):
            up, down = alpha.copy(), alpha.copy()
            up[j] += h
            down[j] -= h
            numeric.append((stats.dirichlet(up).entropy() - stats.dirichlet(down).entropy()) / (2 * h))
        np.testing.assert_allclose(dirichlet_entropy_gradient(alpha), numeric, rtol=1e-6, atol=1e-8)

    def test_invalid_concentrations(self):
        with pytest.raises(DomainError):
            DirichletSource([1.0])
        with pytest.raises(DomainError):
            DirichletSource([1.0, -2.0])


class TestMVNEstimators:
    """Test the multivariate Normal source."""

    q = np.array([[1.0, 0.3, 0.0], [0.3, 0.5, -0.2], [0.0, -0.2, 0.8]])

    @pytest.mark.parametrize("kind", ["rt", "omt"])
    def test_quadratic_unbiased(self, kind, factor_3d):
        source = MVNSource(factor_3d, kind=kind)
        f = quadratic(self.q)
        est = pathwise_gradient(source, f, 5000, seed=0)
        assert _within(est, f.exact_gradient(source))
        assert est.label == f"pathwise-{kind}"

    def test_quartic_and_cosine_unbiased(self, factor_2d):
        source = MVNSource(factor_2d, kind="omt")
        for f in (quartic(self.q[:2, :2]), mvn_cosine([1.0, -0.5])):
            est = pathwise_gradient(source, f, 20_000, seed=1)
            assert _within(est, f.exact_gradient(source))

    def test_rotation_keeps_the_mean(self, factor_2d):
        generator = np.array([[0.0, 0.7], [-0.7, 0.0]])
        source = MVNSource(factor_2d, kind="rt-rotation", rotation=generator)
        f = mvn_cosine([1.0, 1.0])
        est = pathwise_gradient(source, f, 20_000, seed=2)
        assert _within(est, f.exact_gradient(source))

    def test_location_terms(self, factor_2d):
        kappa = np.array([0.5, -2.0])
        source = MVNSource(factor_2d, kind="omt", include_mean=True)
        est = pathwise_gradient(source, linear(kappa), 100, seed=0)
        assert est.parameters[:2] == ("mu_0", "mu_1")
        np.testing.assert_allclose(est.mean[:2], kappa)
        np.testing.assert_allclose(est.variance[:2], 0.0, atol=1e-20)

    def test_score_estimator(self, factor_2d):
        source = MVNSource(factor_2d)
        f = quadratic(self.q[:2, :2])
        est = score_function_gradient(source, f, 20_000, seed=3)
        assert _within(est, f.exact_gradient(source))

    def test_strict_entries(self, factor_3d):
        source = MVNSource(factor_3d, entries="strict")
        assert source.parameters == ("L_1_0", "L_2_0", "L_2_1")

    def test_invalid_sources(self, factor_2d):
        with pytest.raises(DomainError):
            MVNSource(factor_2d, kind="omt-whitened")
        with pytest.raises(DomainError):
            MVNSource(factor_2d, kind="rt-rotation")
        with pytest.raises(DomainError):
            MVNSource(factor_2d, entries=[(0, 1)])
        with pytest.raises(DomainError):
            MVNSource(factor_2d, mean=np.zeros(3))

    def test_quadratic_needs_zero_mean(self, factor_2d):
        source = MVNSource(factor_2d, mean=np.ones(2))
        with pytest.raises(DomainError):
            quadratic(np.eye(2)).exact_gradient(source)


class TestAsymmetricShapeUnbiased:
    """Test pathwise gradients for skewed Beta and Dirichlet shapes against closed forms."""

    @staticmethod
    def _second_moment_gradient(a, total):
        # E[z²] = a(a + 1)/(t(t + 1)) for a Beta(a, t − a) marginal
        moment = a * (a + 1.0) / (total * (total + 1.0))
        shared = -moment * (1.0 / total + 1.0 / (total + 1.0))
        return moment * (1.0 / a + 1.0 / (a + 1.0)) + shared, shared

    @pytest.mark.parametrize("a,b", [(30.0, 7.0), (7.0, 30.0), (45.7, 44.4)])
    def test_beta_second_moment(self, a, b):
        own, other = self._second_moment_gradient(a, a + b)
        est = pathwise_gradient(UnivariateSource(Beta(a, b)), power(2), 20_000, seed=11)
        assert _within(est, [own, other])

    def test_beta_matches_common_noise_finite_difference(self):
        source = UnivariateSource(Beta(30.0, 7.0))
        pathwise = pathwise_gradient(source, power(2), 20_000, seed=5)
        result = fd_expectation_gradient(source, power(2), 0, 20_000, seed=5)
        mean, se = pathwise.component("alpha")
        assert mean == pytest.approx(0.008102, rel=0.05)
        assert abs(result.value - mean) <= 4 * (se + result.standard_error)

    def test_dirichlet_second_moment(self):
        alpha = np.array([20.0, 30.0, 40.0])
        own, other = self._second_moment_gradient(alpha[0], alpha.sum())
        assert own == pytest.approx(0.0038727, rel=1e-4)
        est = pathwise_gradient(DirichletSource(alpha), component_power(0, 2), 20_000, seed=12)
        assert _within(est, [own, other, other])


class TestFiniteDifference:
    """Test the common-random-number finite-difference check."""

    def test_linear_is_exact(self):
        source = UnivariateSource(Normal(0.3, 2.0), ["mu"])
        result = fd_expectation_gradient(source, power(1), 0, 100, seed=0)
        assert result.value == pytest.approx(1.0, rel=1e-8)
        assert result.retries == 0
        assert result.parameter == "mu"

    def test_agrees_with_pathwise(self):
        source = UnivariateSource(Normal(0.5, 1.5))
        pathwise = pathwise_gradient(source, power(2), 20_000, seed=1)
        result = fd_expectation_gradient(source, power(2), 1, 20_000, seed=1)
        mean, se = pathwise.component("sigma")
        assert abs(result.value - mean) <= 4 * (se + result.standard_error)

    def test_invalid_arguments(self):
        source = UnivariateSource(Normal())
        with pytest.raises(DomainError):
            fd_expectation_gradient(source, power(1), 0, 100, seed=0, step=0.0)
        with pytest.raises(DomainError):
            fd_expectation_gradient(source, power(1), 5, 100, seed=0)


class TestTestFunctions:
    """Test the test-function library."""

    def test_power_rejects_zero(self):
        with pytest.raises(DomainError):
            power(0)

    def test_gradients_match_finite_difference(self, rng):
        z = rng.standard_normal((3, 2))
        h = 1e-6
        for f in (quadratic([[1.0, 0.2], [0.2, 2.0]]), quartic([[1.0, 0.2], [0.2, 2.0]]), mvn_cosine([0.3, 1.2])):
            grad = f.gradient(z)
            for k in range(2):
                step = np.zeros(2)
                step[k] = h
                numeric = (f.value(z + step) - f.value(z - step)) / (2 * h)
                np.testing.assert_allclose(grad[:, k], numeric, rtol=1e-6, atol=1e-8)

    def test_linear_exact_gradient_vanishes_in_factor(self):
        source = MVNSource(CholeskyFactor.identity(3))
        np.testing.assert_array_equal(linear([1.0, 2.0, 3.0]).exact_gradient(source), np.zeros(6))

    def test_test_function_is_not_collected(self):
        assert TestFunction.__test__ is False
