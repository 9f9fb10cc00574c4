"""Synthetic Gaussian blob datasets with known labels."""

import numpy as np
import structlog
from sklearn.datasets import make_blobs

from src.core.exceptions import ConfigError
from src.core.models import Dataset

logger = structlog.get_logger()


def blob_centers(c: int, d: int, separation: float, std: float) -> np.ndarray:
    """Centres evenly spaced on a circle in the first two dimensions.

    Neighbouring centres are ``separation * std`` apart.
    """
    if c < 2:
        raise ConfigError(f"need at least 2 blobs, got {c}")
    if d < 2:
        raise ConfigError(f"blobs need d >= 2, got {d}")
    radius = separation * std / (2.0 * np.sin(np.pi / c))
    angles = 2.0 * np.pi * np.arange(c) / c
    centers = np.zeros((c, d))
    centers[:, 0] = radius * np.cos(angles)
    centers[:, 1] = radius * np.sin(angles)
    return centers


def make_blob_dataset(
    n_per_cluster: int = 500,
    c: int = 4,
    d: int = 2,
    separation: float = 8.0,
    std: float = 1.0,
    seed: int = 0,
    noise_fraction: float = 0.0,
) -> Dataset:
    """Isotropic Gaussian blobs, optionally with uniform background noise.

    Noise points are drawn uniformly over the bounding box of the blobs and
    labelled by their nearest centre; ``noise_fraction`` is their share of
    the returned samples.
    """
    data, _ = make_noisy_blobs(n_per_cluster, c, d, separation, std, seed, noise_fraction)
    return data


def make_noisy_blobs(
    n_per_cluster: int = 500,
    c: int = 4,
    d: int = 2,
    separation: float = 8.0,
    std: float = 1.0,
    seed: int = 0,
    noise_fraction: float = 0.1,
) -> tuple[Dataset, np.ndarray]:
    """Blobs plus background noise, with a mask that is True on blob members."""
    if not 0.0 <= noise_fraction < 1.0:
        raise ConfigError(f"noise_fraction must lie in [0, 1), got {noise_fraction}")

    centers = blob_centers(c, d, separation, std)
    features, labels = make_blobs(
        n_samples=[n_per_cluster] * c,
        n_features=d,
        centers=centers,
        cluster_std=std,
        random_state=seed,
    )
    members = np.ones(features.shape[0], dtype=bool)

    name = f"blobs-c{c}-s{seed}"
    if noise_fraction > 0.0:
        rng = np.random.default_rng(seed)
        blob_count = features.shape[0]
        noise_count = int(round(noise_fraction * blob_count / (1.0 - noise_fraction)))
        low, high = features.min(axis=0), features.max(axis=0)
        noise = rng.uniform(low, high, size=(noise_count, d))
        nearest = np.argmin(((noise[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2), axis=1)

        order = rng.permutation(blob_count + noise_count)
        features = np.vstack([features, noise])[order]
        labels = np.concatenate([labels, nearest])[order]
        members = np.concatenate([members, np.zeros(noise_count, dtype=bool)])[order]
        name = f"noisy-{name}"

    logger.debug("Generated blobs", name=name, n=features.shape[0], c=c, d=d)
    return Dataset(features=features, labels=labels, name=name), members
