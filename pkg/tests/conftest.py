"""Pytest configuration and shared fixtures for pathgrad tests."""

import shutil
import tempfile
from pathlib import Path

import numpy as np
import pytest

from pathgrad.config import Config, set_config
from pathgrad.mvn.cholesky import CholeskyFactor
from pathgrad.shape_grad.registry import SurfaceRegistry, set_registry


@pytest.fixture(autouse=True)
def isolated_config(tmp_path_factory):
    """Fresh defaults and an empty coefficient directory for every test."""
    set_config(Config())
    coefficients = tmp_path_factory.mktemp("coefficients")
    set_registry(SurfaceRegistry(coefficients, "oracle"))
    yield
    set_config(Config())
    set_registry(SurfaceRegistry(coefficients, "oracle"))


@pytest.fixture
def temp_dir():
    """Create a temporary directory for test outputs."""
    temp_path = tempfile.mkdtemp()
    yield Path(temp_path)
    shutil.rmtree(temp_path)


@pytest.fixture
def rng():
    """Seeded generator."""
    return np.random.default_rng(12345)


@pytest.fixture
def factor_2d():
    """Bivariate Cholesky factor with correlation."""
    return CholeskyFactor([[1.2, 0.0], [0.7, 0.8]])


@pytest.fixture
def factor_3d():
    """Random 3x3 Cholesky factor (seed 7)."""
    return CholeskyFactor.random(3, np.random.default_rng(7))
