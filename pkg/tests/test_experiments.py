"""Tests for the variance experiments and the accuracy grid."""

import math

import numpy as np
import pytest

from pathgrad.core.exceptions import DomainError
from pathgrad.experiments.accuracy import accuracy_grid, verify_accuracy
from pathgrad.experiments.benchmarks import (
    EXPERIMENTS,
    OMT_LABEL,
    RT_LABEL,
    elbo_objective,
    experiment_config,
    linear_closed_form_variances,
    mixture_quartic_exact,
    run_experiment,
    synthetic_counts,
    synthetic_problem,
)


class TestExperimentConfig:
    """Test resolution of experiment settings."""

    def test_defaults_from_config(self):
        cfg = experiment_config("dirichlet-elbo")
        assert cfg.categories == 50
        assert cfg.sweep.scale == "log"
        assert cfg.samples == 10_000

    def test_overrides(self):
        cfg = experiment_config("mvn-synthetic", sweep="0:1:2", samples=100, dims=None, seed=3)
        assert cfg.samples == 100
        assert cfg.dims == 50
        assert cfg.seed == 3
        assert cfg.sweep.values() == [0.0, 1.0]

    def test_unknown_experiment(self):
        with pytest.raises(DomainError):
            experiment_config("nonexistent")

    def test_all_experiments_registered(self):
        assert set(EXPERIMENTS) == {
            "beta-cubic",
            "dirichlet-elbo",
            "mvn-synthetic",
            "bivariate-cos",
            "mixture-quartic",
            "linear-closed-form",
        }


class TestClosedForms:
    """Test the closed-form helpers."""

    def test_linear_variances(self):
        var_rt, var_omt = linear_closed_form_variances([1.0, 2.0, 3.0])
        assert var_rt == pytest.approx(22.0)
        assert var_omt == pytest.approx(7.0)

    def test_mixture_quartic_exact(self):
        # equal weights: ∂/∂ℓ = ¼ (3 − 10)
        np.testing.assert_allclose(mixture_quartic_exact(0.0), [0.0, 8.0, -1.75], atol=1e-14)

    def test_synthetic_counts(self):
        counts = synthetic_counts(10, seed=2)
        assert counts.shape == (10,)
        assert counts.min() >= 1
        assert counts.sum() == 50
        np.testing.assert_array_equal(counts, synthetic_counts(10, seed=2))

    def test_synthetic_problem(self):
        delta, q = synthetic_problem(4, seed=0)
        assert np.all(np.triu(delta) == 0)
        np.testing.assert_array_equal(q, q.T)
        assert np.all(np.diag(q) == 0)
        assert set(np.unique(q)) <= {0.0, 1.0}

    def test_elbo_gradient_zero_at_posterior(self):
        f = elbo_objective([3, 1, 2], prior=1.0)
        assert f.name == "elbo"
        assert f.exact_gradient is not None


class TestRunExperiment:
    """Small end-to-end experiment runs."""

    def test_beta_cubic(self):
        cfg, table = run_experiment("beta-cubic", sweep="1:4:2", samples=2000)
        assert len(table) == 4
        for row in table.for_estimator("pathwise"):
            assert row.extra["variance_ratio"] > 0
            assert abs(row.estimate.mean[0] - row.exact[0]) <= 5 * row.estimate.standard_error[0]
        assert "variance_ratio" in table.columns()

    def test_mixture_quartic(self):
        _, table = run_experiment("mixture-quartic", sweep="0:0:1", samples=4000)
        row = table.for_estimator("pathwise")[0]
        assert row.estimate.parameters == ("mu_0", "mu_1", "logit_0")
        assert np.all(np.abs(row.estimate.mean - row.exact) <= 5 * row.estimate.standard_error + 1e-12)

    def test_mvn_synthetic_ratio(self):
        _, table = run_experiment("mvn-synthetic", sweep="0.5:1:2", samples=500, dims=4)
        assert len(table.for_estimator(RT_LABEL)) == 2
        ratios = [row.extra["variance_ratio"] for row in table.for_estimator(OMT_LABEL)]
        assert len(ratios) == 2
        assert all(math.isfinite(r) and r > 0 for r in ratios)

    def test_bivariate_cos(self):
        _, table = run_experiment("bivariate-cos", sweep="-1:1:3", samples=500)
        assert len(table) == 6
        assert table.rows[0].estimate.parameters == ("L_1_0",)

    def test_linear_closed_form(self):
        _, table = run_experiment("linear-closed-form", samples=4000, dims=4)
        for row in table.rows:
            assert row.extra["empirical_ratio"] == pytest.approx(1.0, abs=0.15)
        omt = table.for_estimator(OMT_LABEL)[0]
        assert omt.extra["variance_ratio"] < 1.0

    def test_dirichlet_elbo(self):
        _, table = run_experiment("dirichlet-elbo", sweep="1:1:1", samples=500, categories=4)
        row = table.for_estimator("pathwise")[0]
        assert row.estimate.mean.shape == (4,)
        np.testing.assert_array_equal(row.exact, np.zeros(4))

    @pytest.mark.slow
    def test_dirichlet_elbo_default_categories(self):
        cfg, table = run_experiment("dirichlet-elbo", samples=200)
        assert cfg.categories == 50
        rows = table.for_estimator("pathwise")
        assert len(rows) == 5
        for row in rows:
            mean, se = row.estimate.mean, row.estimate.standard_error
            assert mean.shape == (50,)
            assert np.all(np.isfinite(mean))
            # the exact posterior is a stationary point of the ELBO
            assert np.all(np.abs(mean) <= 5 * se + 1e-9)


class TestAccuracy:
    """Test the stratified accuracy grid."""

    def test_grid_sizes(self):
        alpha, z = accuracy_grid("gamma", 10)
        assert alpha.shape == z.shape == (10,)
        a, b, z = accuracy_grid("beta", 27)
        assert a.shape == b.shape == z.shape == (27,)

    def test_single_point(self):
        alpha, z = accuracy_grid("gamma", 1)
        assert alpha[0] == pytest.approx(math.sqrt(1e-3 * 100.0))
        assert z.shape == (1,)

    def test_bad_inputs(self):
        with pytest.raises(DomainError):
            accuracy_grid("gamma", 0)
        with pytest.raises(DomainError):
            accuracy_grid("weibull", 5)

    def test_verify_single_point(self):
        report = verify_accuracy("gamma", points=1)
        assert len(report.records) == 1
        assert report.passed
        assert set(report.records[0]) == set(report.columns)
