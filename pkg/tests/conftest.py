"""Pytest configuration and fixtures."""

import pytest
import tempfile
from pathlib import Path
import shutil

import numpy as np

from src.core.types import DenseMatrix, SparsityPattern
from src.processors.layerwise import layer_from_activations

# 4×4 block used throughout the rounding tests; optimum at 2:4 is 6.05
EXAMPLE_BLOCK = [
    [0.88, 0.01, 0.84, 0.27],
    [0.01, 0.71, 0.75, 0.53],
    [0.82, 0.78, 0.15, 0.25],
    [0.29, 0.50, 0.26, 0.95],
]


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long acceptance-style runs (still part of the default run)")


@pytest.fixture
def temp_dir():
    """Create a temporary directory for testing."""
    temp = tempfile.mkdtemp()
    yield Path(temp)
    shutil.rmtree(temp)


@pytest.fixture
def example_block():
    """The 4×4 example block as a float64 array."""
    return np.array(EXAMPLE_BLOCK, dtype=np.float64)


@pytest.fixture
def pattern_24():
    return SparsityPattern(2, 4)


@pytest.fixture
def rng():
    """Seeded generator so every test run sees the same data."""
    return np.random.default_rng(1234)


@pytest.fixture
def synthetic_layer():
    """64×64 Gaussian layer with 256 Gaussian calibration rows, λ = 0.01 · mean diag(XᵀX)."""
    generator = np.random.default_rng(7)
    w_hat = DenseMatrix(generator.standard_normal((64, 64)))
    x = generator.standard_normal((256, 64))
    return layer_from_activations(x, w_hat, lam_fraction=0.01)


@pytest.fixture
def mock_settings(monkeypatch):
    """Application settings with every TNM_* variable cleared."""
    for name in ("TNM_THREADS", "TNM_TAU_SCALE", "TNM_MAX_ITERS", "TNM_LS_STEPS", "TNM_OUTPUT_DIR", "TNM_VERBOSE_LOGGING"):
        monkeypatch.delenv(name, raising=False)
    from src.config import AppSettings
    return AppSettings.from_env()
