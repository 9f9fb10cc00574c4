"""Shared fixtures."""

import numpy as np
import pytest

from src.adapters.synthetic import make_blob_dataset
from src.core.config import settings
from src.core.models import Dataset


@pytest.fixture
def no_jit(monkeypatch):
    """Run numba kernels as plain Python."""
    monkeypatch.setattr(settings, "use_jit", False)


@pytest.fixture
def blobs() -> Dataset:
    """Four well separated 2-D blobs, 60 points each."""
    return make_blob_dataset(n_per_cluster=60, c=4, d=2, separation=10.0, seed=3)


@pytest.fixture
def random_data() -> Dataset:
    """Unstructured Gaussian cloud with random labels."""
    rng = np.random.default_rng(11)
    return Dataset(
        features=rng.normal(size=(50, 3)),
        labels=rng.integers(0, 3, size=50),
        name="random",
    )
