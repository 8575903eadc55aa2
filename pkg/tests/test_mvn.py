"""Tests for the multivariate Normal velocity fields."""

import numpy as np
import pytest
from scipy import stats

from pathgrad.core.exceptions import AsymmetryError, ConvergenceError, DomainError, SingularCholeskyError
from pathgrad.mvn import (
    CholeskyFactor,
    VelocityKind,
    cholesky_score,
    kinetic_energy,
    kinetic_energy_mc,
    mean_score,
    mu_field,
    mu_velocity,
    omt_contraction,
    omt_velocity,
    omt_velocity_whitened,
    random_antisymmetric,
    rotation_contraction,
    rotation_control_variate,
    rt_contraction,
    rt_velocity,
    solve_symmetric_sylvester,
    sym_eig,
    velocity_field,
    whitened_potential,
)

ALL_KINDS = ("rt", "omt", "omt-whitened", "rt-rotation")


def _field(kind, factor, a, b, mean=None):
    rotation = random_antisymmetric(factor.dimension, np.random.default_rng(1)) if kind == "rt-rotation" else None
    return velocity_field(kind, factor, a, b, mean=mean, rotation=rotation)


class TestCholeskyFactor:
    """Test the Cholesky factor container."""

    def test_derived_matrices(self, factor_3d):
        np.testing.assert_allclose(factor_3d.precision @ factor_3d.covariance, np.eye(3), atol=1e-12)
        np.testing.assert_allclose(factor_3d.inverse @ factor_3d.matrix, np.eye(3), atol=1e-12)

    def test_solves(self, factor_3d, rng):
        z = rng.standard_normal((4, 3))
        np.testing.assert_allclose(factor_3d.solve(z), z @ factor_3d.inverse.T, atol=1e-12)
        np.testing.assert_allclose(factor_3d.solve_transpose(z), z @ factor_3d.inverse, atol=1e-12)

    def test_logpdf_matches_scipy(self, factor_2d, rng):
        mean = np.array([0.5, -1.0])
        z = rng.standard_normal((3, 2))
        expected = stats.multivariate_normal(mean, factor_2d.covariance).logpdf(z)
        np.testing.assert_allclose(factor_2d.logpdf(z, mean), expected, rtol=1e-12)

    def test_lower_indices(self):
        factor = CholeskyFactor.identity(4)
        indices = factor.lower_indices()
        assert len(indices) == 10
        assert all(a >= b for a, b in indices)

    def test_invalid_matrices(self):
        with pytest.raises(DomainError):
            CholeskyFactor([[1.0, 0.5], [0.0, 1.0]])
        with pytest.raises(SingularCholeskyError):
            CholeskyFactor([[1.0, 0.0], [0.3, 0.0]])
        with pytest.raises(DomainError):
            CholeskyFactor.identity(2).with_entry(0, 1, 0.2)

    def test_ill_conditioned_precision(self):
        factor = CholeskyFactor(np.diag([1.0, 1e-7]))
        with pytest.raises(SingularCholeskyError):
            omt_velocity(factor, np.ones(2), 1, 0)


class TestLinalg:
    """Test the eigensolver and the Sylvester solve."""

    def _spd(self, rng, d=5):
        b = rng.standard_normal((d, d))
        return b @ b.T + d * np.eye(d)

    def test_jacobi_matches_lapack(self, rng):
        matrix = self._spd(rng)
        jacobi = sym_eig(matrix)
        lapack = sym_eig(matrix, method="lapack")
        np.testing.assert_allclose(jacobi.values, lapack.values, rtol=1e-12)
        assert np.all(np.diff(jacobi.values) <= 0)
        assert jacobi.orthogonality_error() < 1e-12
        np.testing.assert_allclose(jacobi.reconstruct(), matrix, atol=1e-10)

    def test_sylvester_residual(self, rng):
        p = self._spd(rng)
        xi = rng.standard_normal((5, 5))
        xi = xi + xi.T
        s = solve_symmetric_sylvester(sym_eig(p), xi)
        np.testing.assert_allclose(p @ s + s @ p, xi, atol=1e-10)

    def test_nonsymmetric_rejected(self):
        with pytest.raises(DomainError):
            sym_eig(np.array([[1.0, 2.0], [0.0, 1.0]]))

    def test_sweep_cap(self):
        with pytest.raises(ConvergenceError):
            sym_eig(np.array([[2.0, 1.0], [1.0, 3.0]]), max_sweeps=0)


class TestTransportEquation:
    """Every field must reproduce the score: s(z) = −tr M + (M(z − μ))·P(z − μ)."""

    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_fields_solve_transport(self, kind, factor_3d, rng):
        mean = np.array([0.3, -0.2, 1.0])
        z = mean + rng.standard_normal((6, 3))
        zc = z - mean
        score = cholesky_score(factor_3d, z, mean)
        for a, b in factor_3d.lower_indices():
            field = _field(kind, factor_3d, a, b, mean)
            predicted = -field.divergence() + np.sum(field(z) * (zc @ factor_3d.precision), axis=-1)
            np.testing.assert_allclose(predicted, score[:, a, b], atol=1e-10)

    def test_rt_divergence(self, factor_3d):
        for a, b in factor_3d.lower_indices():
            assert velocity_field("rt", factor_3d, a, b).divergence() == pytest.approx(factor_3d.inverse[b, a])

    def test_score_matches_finite_difference(self, factor_2d):
        z = np.array([[0.4, -0.9], [1.1, 0.2]])
        h = 1e-6
        score = cholesky_score(factor_2d, z)
        for a, b in factor_2d.lower_indices():
            value = factor_2d.matrix[a, b]
            up = factor_2d.with_entry(a, b, value + h).logpdf(z)
            down = factor_2d.with_entry(a, b, value - h).logpdf(z)
            np.testing.assert_allclose(score[:, a, b], (up - down) / (2 * h), rtol=1e-6, atol=1e-8)

    def test_mean_field(self, factor_2d):
        field = mu_field(1, 2)
        np.testing.assert_array_equal(field(np.array([3.0, 4.0])), [0.0, 1.0])
        z = np.array([0.4, -0.9])
        np.testing.assert_allclose(mean_score(factor_2d, z), factor_2d.precision @ z, atol=1e-12)


class TestSymmetry:
    """Test symmetry of the OMT field and asymmetry of RT."""

    def test_omt_is_a_gradient(self, factor_3d):
        for a, b in factor_3d.lower_indices():
            assert velocity_field("omt", factor_3d, a, b).asymmetry() < 1e-10

    def test_rt_is_not(self, factor_2d):
        assert velocity_field("rt", factor_2d, 1, 0).asymmetry() == pytest.approx(1.0 / 1.2)

    def test_identity_factor(self):
        factor = CholeskyFactor.identity(3)
        field = velocity_field(VelocityKind.OMT, factor, 2, 0)
        expected = np.zeros((3, 3))
        expected[2, 0] = expected[0, 2] = 0.5
        np.testing.assert_allclose(field.matrix, expected, atol=1e-14)

    def test_whitened_field_is_potential_gradient(self, factor_3d, rng):
        zt = rng.standard_normal(3)
        h = 1e-6
        velocity = omt_velocity_whitened(factor_3d, zt, 2, 1)
        for k in range(3):
            step = np.zeros(3)
            step[k] = h
            numeric = (whitened_potential(factor_3d, zt + step, 2, 1) - whitened_potential(factor_3d, zt - step, 2, 1)) / (2 * h)
            assert velocity[k] == pytest.approx(numeric, rel=1e-6, abs=1e-9)

    def test_rotation_generator_must_be_antisymmetric(self, factor_2d):
        with pytest.raises(AsymmetryError):
            velocity_field("rt-rotation", factor_2d, 1, 0, rotation=np.eye(2))
        with pytest.raises(DomainError):
            velocity_field("rt-rotation", factor_2d, 1, 0)
        with pytest.raises(AsymmetryError):
            rotation_control_variate(np.ones((2, 2)), np.zeros(2))


class TestKineticEnergy:
    """Test the kinetic energy of the fields."""

    def test_omt_minimizes_energy(self, factor_3d):
        for a, b in factor_3d.lower_indices():
            omt = kinetic_energy(velocity_field("omt", factor_3d, a, b), factor_3d)
            rt = kinetic_energy(velocity_field("rt", factor_3d, a, b), factor_3d)
            whitened = kinetic_energy(velocity_field("omt-whitened", factor_3d, a, b), factor_3d)
            assert omt <= rt + 1e-12
            assert omt <= whitened + 1e-12

    @pytest.mark.slow
    def test_monte_carlo_agrees(self, factor_2d):
        field = velocity_field("rt", factor_2d, 1, 0)
        exact = kinetic_energy(field, factor_2d)
        estimate, stderr = kinetic_energy_mc(field, factor_2d, np.random.default_rng(0), 50000)
        assert abs(estimate - exact) < 5 * stderr


class TestPointEvaluations:
    """Test point evaluations and batched contractions against the field matrices."""

    def test_point_fields_match_matrices(self, factor_3d, rng):
        z = rng.standard_normal((4, 3))
        for a, b in factor_3d.lower_indices():
            np.testing.assert_allclose(rt_velocity(factor_3d, z, a, b), _field("rt", factor_3d, a, b)(z), atol=1e-12)
            np.testing.assert_allclose(omt_velocity(factor_3d, z, a, b), _field("omt", factor_3d, a, b)(z), atol=1e-12)

    def test_contractions(self, factor_3d, rng):
        z = rng.standard_normal((4, 3))
        g = rng.standard_normal((4, 3))
        generator = random_antisymmetric(3, np.random.default_rng(1))
        rt = rt_contraction(factor_3d, z, g)
        omt = omt_contraction(factor_3d, z, g)
        rot = rotation_contraction(factor_3d, z, g, generator)
        for a, b in factor_3d.lower_indices():
            np.testing.assert_allclose(rt[:, a, b], np.sum(g * rt_velocity(factor_3d, z, a, b), axis=-1), atol=1e-12)
            np.testing.assert_allclose(omt[:, a, b], np.sum(g * omt_velocity(factor_3d, z, a, b), axis=-1), atol=1e-10)
            expected = np.sum(g * _field("rt-rotation", factor_3d, a, b)(z), axis=-1)
            np.testing.assert_allclose(rot[:, a, b], expected, atol=1e-10)
        assert np.all(rt[:, 0, 1:] == 0)

    def test_upper_index_rejected(self, factor_2d):
        with pytest.raises(DomainError):
            rt_velocity(factor_2d, np.zeros(2), 0, 1)
        with pytest.raises(DomainError):
            velocity_field("omt", factor_2d, 2, 0)

    def test_mu_velocity(self):
        np.testing.assert_array_equal(mu_velocity(1, 3), [0.0, 1.0, 0.0])
        with pytest.raises(DomainError):
            mu_velocity(3, 3)
