"""Random-walk expanded adjacency indicator and neighbourhood averaging."""

from dataclasses import dataclass
from functools import cached_property

import numba
import numpy as np
import structlog
from scipy import sparse

from src.core.exceptions import ConfigError, DegenerateInputError
from src.core.jit import compiled
from src.core.models import FuzzyPartition
from src.graph.knn import KnnGraph

logger = structlog.get_logger()


@dataclass(frozen=True, eq=False)
class AdjacencyIndicator:
    """0/1 graph of samples reachable within ``theta`` hops, in CSR form.

    ``indices[indptr[i]:indptr[i + 1]]`` is the sorted set A_i.
    """

    indptr: np.ndarray
    indices: np.ndarray
    theta: int

    @property
    def n(self) -> int:
        return int(self.indptr.shape[0] - 1)

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i] : self.indptr[i + 1]]

    def sizes(self) -> np.ndarray:
        return np.diff(self.indptr)

    @cached_property
    def matrix(self) -> sparse.csr_matrix:
        """The indicator as a sparse 0/1 matrix."""
        data = np.ones(self.indices.shape[0], dtype=np.float64)
        return sparse.csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))


def default_theta(n: int, c: int, k: int) -> int:
    """Smallest theta >= 1 with k**theta >= n / c, i.e. ceil(log_k(n / c))."""
    if k < 2:
        return 1
    theta = 1
    reach = k
    # Integer arithmetic: k**theta * c >= n
    while reach * c < n:
        reach *= k
        theta += 1
    return theta


@numba.njit(cache=True, nogil=True)
def _bfs(indptr, indices, theta, out_indptr, out_indices, fill):  # pragma: no cover - jit
    n = indptr.shape[0] - 1
    marker = np.full(n, -1, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    for source in range(n):
        marker[source] = source
        queue[0] = source
        head = 0
        tail = 1
        for _ in range(theta):
            level_end = tail
            while head < level_end:
                u = queue[head]
                head += 1
                for e in range(indptr[u], indptr[u + 1]):
                    v = indices[e]
                    if marker[v] != source:
                        marker[v] = source
                        queue[tail] = v
                        tail += 1
            if tail == level_end:
                break
        if fill:
            start = out_indptr[source]
            out_indices[start : start + tail - 1] = np.sort(queue[1:tail])
        else:
            out_indptr[source + 1] = tail - 1


def expand_adjacency(graph: KnnGraph, theta: int) -> AdjacencyIndicator:
    """Samples reachable from each sample within ``theta`` hops over the support of W."""
    if theta < 1:
        raise ConfigError(f"theta must be >= 1, got {theta}")

    bfs = compiled(_bfs)
    indptr = graph.adjacency.indptr.astype(np.int64)
    indices = graph.adjacency.indices.astype(np.int64)
    n = graph.n

    out_indptr = np.zeros(n + 1, dtype=np.int64)
    bfs(indptr, indices, theta, out_indptr, np.empty(0, dtype=np.int64), False)
    out_indptr = np.cumsum(out_indptr)
    out_indices = np.empty(out_indptr[-1], dtype=np.int64)
    bfs(indptr, indices, theta, out_indptr, out_indices, True)

    indicator = AdjacencyIndicator(indptr=out_indptr, indices=out_indices, theta=theta)
    sizes = indicator.sizes()
    logger.info(
        "Expanded adjacency",
        theta=theta,
        mean_size=float(sizes.mean()),
        max_size=int(sizes.max()),
    )
    return indicator


def neighborhood_average(graph: KnnGraph, partition: FuzzyPartition, i: int) -> np.ndarray:
    """Degree-normalised weighted mean of the neighbours' probability vectors."""
    degree = graph.degrees[i]
    if degree <= 0.0:
        raise DegenerateInputError(f"sample {i} has zero degree")
    neighbors, weights = graph.neighbors(i)
    return (weights @ partition.probs[neighbors]) / degree


def neighborhood_averages(graph: KnnGraph, probs: np.ndarray) -> np.ndarray:
    """``neighborhood_average`` for every sample at once (D^-1 W P)."""
    return (graph.adjacency @ probs) / graph.degrees[:, None]
