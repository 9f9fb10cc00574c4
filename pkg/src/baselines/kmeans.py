"""K-means++ seeding and Lloyd iterations."""

from dataclasses import dataclass, field

import numpy as np
import structlog
from scipy.spatial.distance import cdist

from src.core.exceptions import ConfigError, DegenerateInputError
from src.core.models import Dataset, HardPartition

logger = structlog.get_logger()


@dataclass(frozen=True, eq=False)
class Centroids:
    """Cluster centres with the number of samples assigned to each."""

    centers: np.ndarray
    counts: np.ndarray

    @property
    def c(self) -> int:
        return int(self.centers.shape[0])


@dataclass(frozen=True, eq=False)
class KMeansResult:
    assignment: HardPartition
    centroids: Centroids
    inertia: list[float] = field(default_factory=list)
    iterations: int = 0


def _assign(features: np.ndarray, centers: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    d2 = cdist(features, centers, metric="sqeuclidean")
    labels = np.argmin(d2, axis=1)
    return labels, d2[np.arange(features.shape[0]), labels]


def _update_centers(
    features: np.ndarray, labels: np.ndarray, previous: np.ndarray
) -> np.ndarray:
    c = previous.shape[0]
    sums = np.zeros_like(previous)
    np.add.at(sums, labels, features)
    counts = np.bincount(labels, minlength=c)
    centers = previous.copy()
    filled = counts > 0
    centers[filled] = sums[filled] / counts[filled, None]
    return centers


def _repair_empty(
    features: np.ndarray, labels: np.ndarray, d2: np.ndarray, centers: np.ndarray
) -> None:
    """Reseed every empty cluster at the sample farthest from its centre (in place)."""
    c = centers.shape[0]
    for col in np.flatnonzero(np.bincount(labels, minlength=c) == 0):
        counts = np.bincount(labels, minlength=c)
        movable = counts[labels] > 1
        far = int(np.argmax(np.where(movable, d2, -1.0)))
        logger.warning("Reseeding empty cluster", cluster=int(col), sample=far)
        centers[col] = features[far]
        labels[far] = col
        d2[far] = 0.0


def kmeanspp_seed(data: Dataset, c: int, seed: int) -> Centroids:
    """D^2-weighted seeding: each new seed drawn with probability proportional
    to its squared distance from the nearest seed chosen so far."""
    features = data.features
    n = data.n
    if c < 1:
        raise ConfigError(f"cluster count must be >= 1, got {c}")
    distinct = np.unique(features, axis=0).shape[0]
    if c > distinct:
        raise DegenerateInputError(f"cannot pick {c} distinct seeds from {distinct} distinct points")

    rng = np.random.default_rng(seed)
    chosen = [int(rng.integers(n))]
    d2 = cdist(features, features[chosen], metric="sqeuclidean")[:, 0]
    for _ in range(1, c):
        idx = int(rng.choice(n, p=d2 / d2.sum()))
        chosen.append(idx)
        d2 = np.minimum(d2, cdist(features, features[[idx]], metric="sqeuclidean")[:, 0])

    centers = features[chosen].copy()
    labels, _ = _assign(features, centers)
    return Centroids(centers=centers, counts=np.bincount(labels, minlength=c))


def kmeans_fit(data: Dataset, c: int, seed: int, max_iters: int = 300) -> KMeansResult:
    """Lloyd iterations from K-means++ seeds until the assignment is stable.

    ``max_iters=0`` returns the nearest-seed assignment.
    """
    features = data.features
    seeds = kmeanspp_seed(data, c, seed)
    centers = seeds.centers.copy()
    labels, d2 = _assign(features, centers)
    inertia = [float(d2.sum())]

    iterations = 0
    for iterations in range(1, max_iters + 1):
        centers = _update_centers(features, labels, centers)
        new_labels, d2 = _assign(features, centers)
        _repair_empty(features, new_labels, d2, centers)
        inertia.append(float(d2.sum()))
        stable = np.array_equal(new_labels, labels)
        labels = new_labels
        if stable:
            break

    logger.debug("K-means finished", c=c, iterations=iterations, inertia=inertia[-1])
    return KMeansResult(
        assignment=HardPartition(labels=labels, c=c),
        centroids=Centroids(centers=centers, counts=np.bincount(labels, minlength=c)),
        inertia=inertia,
        iterations=iterations,
    )
