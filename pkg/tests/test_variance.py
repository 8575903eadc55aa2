"""Tests for variance profiles over parameter sweeps."""

import numpy as np
import pytest

from pathgrad.core.exceptions import DomainError
from pathgrad.estimators import TestFunction, UnivariateSource
from pathgrad.estimators.variance import EstimatorSpec, SweepSpec, VarianceTable, variance_profile
from pathgrad.univariate import Normal


def _square():
    return TestFunction(
        name="z^2",
        value=lambda z: np.asarray(z) ** 2,
        gradient=lambda z: 2.0 * np.asarray(z),
        exact_gradient=lambda source: np.array([2.0 * source.dist.sigma]),
    )


def _estimators():
    def build(sigma):
        return UnivariateSource(Normal(0.0, sigma), ["sigma"])

    return [EstimatorSpec("pathwise", build), EstimatorSpec("score", build, method="score")]


class TestSweepSpec:
    """Test parsing of min:max:points[:scale]."""

    def test_log_sweep(self):
        sweep = SweepSpec.parse("1:100:3:log")
        np.testing.assert_allclose(sweep.values(), [1.0, 10.0, 100.0], rtol=1e-12)
        assert str(sweep) == "1:100:3:log"

    def test_linear_default(self):
        sweep = SweepSpec.parse("0:1:5")
        assert sweep.scale == "linear"
        assert sweep.values() == pytest.approx([0.0, 0.25, 0.5, 0.75, 1.0])

    def test_single_point(self):
        assert SweepSpec.parse("2:9:1").values() == [2.0]

    @pytest.mark.parametrize("text", ["1:2", "a:b:3", "0:1:3:log", "1:2:0", "1:2:3:cubic", "1:2:3:log:x"])
    def test_malformed(self, text):
        with pytest.raises(DomainError):
            SweepSpec.parse(text)


class TestVarianceProfile:
    """Test the profile runner and its table."""

    def test_rows_and_exact(self):
        table = variance_profile([0.5, 2.0], _estimators(), _square(), n_samples=4000, seed=11)
        assert len(table) == 4
        assert [row.estimator for row in table.rows] == ["pathwise", "score", "pathwise", "score"]
        for row in table.rows:
            gap = abs(row.estimate.mean[0] - row.exact[0])
            assert gap <= 5 * row.estimate.standard_error[0]

    def test_pathwise_beats_score(self):
        table = variance_profile([0.5, 2.0], _estimators(), _square(), n_samples=4000, seed=11)
        ratios = table.ratio("pathwise", "score")
        assert len(ratios) == 2
        assert all(r < 1.0 for r in ratios)

    def test_records(self):
        table = variance_profile([1.0], _estimators(), _square(), n_samples=200, seed=0)
        columns = table.columns()
        assert columns[:3] == ["sweep", "estimator", "parameters"]
        assert "exact" in columns
        record = table.records()[0]
        assert record["parameters"] == "sigma"
        assert record["n_samples"] == 200
        assert record["seed"] == 0

    def test_test_function_may_depend_on_sweep(self):
        seen = []

        def factory(value):
            seen.append(value)
            return _square()

        variance_profile([1.0, 3.0], _estimators()[:1], factory, n_samples=50, seed=0)
        assert seen == [1.0, 3.0]

    def test_shared_seed_across_estimators(self):
        a = variance_profile([1.0], _estimators()[:1], _square(), n_samples=100, seed=5)
        b = variance_profile([1.0], _estimators()[:1], _square(), n_samples=100, seed=5)
        np.testing.assert_array_equal(a.rows[0].estimate.mean, b.rows[0].estimate.mean)

    def test_empty_inputs(self):
        with pytest.raises(DomainError):
            variance_profile([], _estimators(), _square(), n_samples=10, seed=0)
        with pytest.raises(DomainError):
            variance_profile([1.0], [], _square(), n_samples=10, seed=0)

    def test_empty_table(self):
        table = VarianceTable()
        assert len(table) == 0
        assert table.records() == []
