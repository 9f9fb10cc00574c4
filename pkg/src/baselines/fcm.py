"""Fuzzy c-means and fuzzy c-means with the local consistency projection."""

from dataclasses import dataclass, field

import numpy as np
import structlog
from scipy.spatial.distance import cdist

from src.core.exceptions import ConfigError, NumericalError
from src.core.models import Dataset, FuzzyPartition
from src.gpac.scores import project_local_consistency
from src.graph.adjacency import neighborhood_averages
from src.graph.knn import KnnGraph

logger = structlog.get_logger()

DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITERS = 300


@dataclass(frozen=True, eq=False)
class FcmResult:
    partition: FuzzyPartition
    centers: np.ndarray
    objective: list[float] = field(default_factory=list)
    iterations: int = 0


def fcm_objective(features: np.ndarray, probs: np.ndarray, centers: np.ndarray, m: float) -> float:
    """sum_i sum_l p_il^m |x_i - v_l|^2."""
    d2 = cdist(features, centers, metric="sqeuclidean")
    return float(np.sum(np.power(probs, m) * d2))


def fcm_centers(
    features: np.ndarray, probs: np.ndarray, m: float, previous: np.ndarray | None = None
) -> np.ndarray:
    """p^m-weighted means; a column with no weight keeps its previous centre."""
    powered = np.power(probs, m)
    mass = powered.sum(axis=0)
    centers = np.zeros((probs.shape[1], features.shape[1])) if previous is None else previous.copy()
    alive = mass > 0.0
    centers[alive] = (powered[:, alive].T @ features) / mass[alive, None]
    return centers


def fcm_memberships(features: np.ndarray, centers: np.ndarray, m: float) -> np.ndarray:
    """p_il proportional to |x_i - v_l|^(-2/(m-1)).

    A sample lying on a centre gets membership 1 there (first such centre).
    """
    d2 = cdist(features, centers, metric="sqeuclidean")
    probs = np.empty_like(d2)

    on_center = np.any(d2 == 0.0, axis=1)
    regular = ~on_center
    if np.any(regular):
        logits = -(1.0 / (m - 1.0)) * np.log(d2[regular])
        weights = np.exp(logits - logits.max(axis=1, keepdims=True))
        probs[regular] = weights / weights.sum(axis=1, keepdims=True)
    if np.any(on_center):
        rows = np.flatnonzero(on_center)
        probs[rows] = 0.0
        probs[rows, np.argmax(d2[rows] == 0.0, axis=1)] = 1.0

    if not np.all(np.isfinite(probs)):
        raise NumericalError("non-finite FCM membership")
    return probs


def _fcm(
    data: Dataset,
    c: int,
    m: float,
    seed: int,
    tol: float,
    max_iters: int,
    graph: KnnGraph | None = None,
    beta: float = 0.0,
) -> FcmResult:
    if m <= 1.0:
        raise ConfigError(f"m must be > 1, got {m}")
    if not 2 <= c <= data.n:
        raise ConfigError(f"cluster count c={c} must lie in [2, n={data.n}]")

    features = data.features
    rng = np.random.default_rng(seed)
    probs = rng.dirichlet(np.ones(c), size=data.n)
    centers: np.ndarray | None = None
    history: list[float] = []

    iterations = 0
    for iterations in range(1, max_iters + 1):
        centers = fcm_centers(features, probs, m, centers)
        updated = fcm_memberships(features, centers, m)
        if graph is not None:
            updated = project_local_consistency(updated, neighborhood_averages(graph, probs), beta)
        history.append(fcm_objective(features, updated, centers, m))
        delta = float(np.max(np.abs(updated - probs)))
        probs = updated
        if delta < tol:
            break

    if centers is None:
        centers = fcm_centers(features, probs, m)
    logger.debug("FCM finished", c=c, m=m, beta=beta, iterations=iterations)
    return FcmResult(
        partition=FuzzyPartition(probs=probs),
        centers=centers,
        objective=history,
        iterations=iterations,
    )


def fcm_fit(
    data: Dataset,
    c: int,
    m: float,
    seed: int,
    tol: float = DEFAULT_TOL,
    max_iters: int = DEFAULT_MAX_ITERS,
) -> FcmResult:
    """Alternate the weighted-mean centre update and the membership update."""
    return _fcm(data, c, m, seed, tol, max_iters)


def fcm_lcc_fit(
    data: Dataset,
    c: int,
    m: float,
    beta: float,
    graph: KnnGraph,
    seed: int,
    tol: float = DEFAULT_TOL,
    max_iters: int = DEFAULT_MAX_ITERS,
) -> FcmResult:
    """FCM where every membership update is pulled toward the neighbourhood
    average of the previous memberships with weight ``beta``."""
    if beta < 0.0:
        raise ConfigError(f"beta must be >= 0, got {beta}")
    return _fcm(data, c, m, seed, tol, max_iters, graph=graph, beta=beta)
