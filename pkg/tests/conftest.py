"""Shared fixtures: seeded streams and small covariance models."""

import numpy as np
import pytest

from models.features import build_isotropic_features, build_sigma_haar_spectrum
from models.noise import build_ar1, build_isotropic
from risk.montecarlo import McConfig
from sampler.streams import RandomStream


@pytest.fixture
def stream():
    return RandomStream(20240611)


@pytest.fixture
def gen():
    return np.random.default_rng(42)


@pytest.fixture
def iso_features_20():
    return build_isotropic_features(20)


@pytest.fixture
def haar_features_20():
    """Haar-rotated spectrum on p=20 with unit mean eigenvalue."""
    return build_sigma_haar_spectrum(20, RandomStream(7, 3), scale=20.0)


@pytest.fixture
def ar1_noise_10():
    return build_ar1(10, 1.0, 0.5)


@pytest.fixture
def iso_noise_10():
    return build_isotropic(10, 1.0)


@pytest.fixture
def small_mc():
    return McConfig(n_x=60, n_eps=50, n_beta=200, seed=11)


@pytest.fixture
def clean_env(monkeypatch):
    """No RISKLAB_* overrides leak in from the calling shell."""
    for var in ("RISKLAB_THREADS", "RISKLAB_SEED", "RISKLAB_OUTPUT_DIR"):
        monkeypatch.delenv(var, raising=False)
    return monkeypatch
