"""Exact k-nearest-neighbour search and the Gaussian-weighted k-NN graph."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import structlog
from scipy import sparse
from scipy.spatial.distance import cdist

from src.core.config import settings
from src.core.exceptions import ConfigError, DatasetFormatError, DegenerateInputError
from src.core.models import Dataset

logger = structlog.get_logger()

# Smallest weight kept on a k-NN edge; exp() underflow would drop the edge
MIN_WEIGHT = float(np.finfo(np.float64).tiny)


@dataclass(frozen=True, eq=False)
class KnnLists:
    """Per-sample neighbour indices and squared distances, nearest first."""

    indices: np.ndarray
    sq_distances: np.ndarray


@dataclass(frozen=True, eq=False)
class KnnGraph:
    """Symmetric sparse similarity graph W with its degree vector."""

    adjacency: sparse.csr_matrix
    degrees: np.ndarray
    sigma: float
    k: int

    @property
    def n(self) -> int:
        return int(self.adjacency.shape[0])

    def neighbors(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """Neighbour indices and weights of sample ``i``."""
        start, stop = self.adjacency.indptr[i], self.adjacency.indptr[i + 1]
        return self.adjacency.indices[start:stop], self.adjacency.data[start:stop]

    @classmethod
    def from_adjacency(cls, adjacency: sparse.spmatrix, sigma: float, k: int) -> "KnnGraph":
        adjacency = sparse.csr_matrix(adjacency, dtype=np.float64)
        adjacency.sort_indices()
        degrees = np.asarray(adjacency.sum(axis=1)).ravel()
        if np.any(degrees <= 0.0):
            raise DegenerateInputError("graph has a sample with zero degree")
        return cls(adjacency=adjacency, degrees=degrees, sigma=sigma, k=k)


def _select_block(
    block: np.ndarray, start: int, k: int, indices: np.ndarray, sq_distances: np.ndarray
) -> None:
    rows = np.arange(block.shape[0])
    block[rows, rows + start] = np.inf
    kth = np.partition(block, k - 1, axis=1)[:, k - 1]
    for r in rows:
        candidates = np.flatnonzero(block[r] <= kth[r])
        # Ties resolved by ascending index
        order = np.lexsort((candidates, block[r, candidates]))[:k]
        chosen = candidates[order]
        indices[start + r] = chosen
        sq_distances[start + r] = block[r, chosen]


def pairwise_knn(data: Dataset, k: int) -> KnnLists:
    """Brute-force k nearest neighbours of every sample (self excluded)."""
    n = data.n
    if not 1 <= k < n:
        raise ConfigError(f"k={k} must satisfy 1 <= k < n={n}")

    features = data.features
    rows_per_block = max(1, settings.knn_chunk_bytes // (8 * n))
    blocks = [(start, min(start + rows_per_block, n)) for start in range(0, n, rows_per_block)]

    indices = np.empty((n, k), dtype=np.int64)
    sq_distances = np.empty((n, k), dtype=np.float64)

    def search(bounds: tuple[int, int]) -> None:
        start, stop = bounds
        block = cdist(features[start:stop], features, metric="sqeuclidean")
        if not np.all(np.isfinite(block)):
            raise DegenerateInputError(
                f"non-finite squared distance in rows {start}..{stop - 1}"
            )
        _select_block(block, start, k, indices, sq_distances)

    with ThreadPoolExecutor(max_workers=settings.threads) as pool:
        # list() re-raises the first worker exception
        list(pool.map(search, blocks))

    return KnnLists(indices=indices, sq_distances=sq_distances)


def estimate_sigma(knn: KnnLists) -> float:
    """Mean squared distance from each sample to its k-th nearest neighbour."""
    if knn.indices.size == 0:
        raise DegenerateInputError("empty neighbour lists")
    sigma = float(np.mean(knn.sq_distances[:, -1]))
    if sigma <= 0.0:
        raise DegenerateInputError(
            "all k-th neighbour distances are zero (coincident data); supply sigma explicitly"
        )
    return sigma


def build_knn_graph(data: Dataset, k: int, sigma: float | None = None) -> KnnGraph:
    """Gaussian-weighted union k-NN graph."""
    if sigma is not None and sigma <= 0.0:
        raise ConfigError(f"sigma must be > 0, got {sigma}")

    knn = pairwise_knn(data, k)
    if sigma is None:
        sigma = estimate_sigma(knn)

    n = data.n
    rows = np.repeat(np.arange(n), k)
    cols = knn.indices.ravel()
    weights = np.exp(-knn.sq_distances.ravel() / (2.0 * sigma))
    floored = int(np.count_nonzero(weights < MIN_WEIGHT))
    if floored:
        logger.warning("Kernel weights underflowed, flooring", edges=floored, sigma=sigma)
        weights = np.maximum(weights, MIN_WEIGHT)

    directed = sparse.csr_matrix((weights, (rows, cols)), shape=(n, n))
    # j in N(i) or i in N(j); both directions carry the same weight
    graph = KnnGraph.from_adjacency(directed.maximum(directed.T), sigma=sigma, k=k)

    logger.info("Built k-NN graph", n=n, k=k, sigma=sigma, edges=graph.adjacency.nnz // 2)
    return graph


def save_edge_list(graph: KnnGraph, path: str | Path) -> None:
    """Write each undirected edge once as ``i j w`` with i < j, sorted."""
    upper = sparse.triu(graph.adjacency, k=1).tocoo()
    order = np.lexsort((upper.col, upper.row))
    with open(path, "w", encoding="utf-8") as f:
        for i, j, w in zip(upper.row[order], upper.col[order], upper.data[order], strict=True):
            f.write(f"{i} {j} {w:.17g}\n")
    logger.info("Saved edge list", path=str(path), edges=len(order))


def load_edge_list(path: str | Path, n: int | None = None) -> sparse.csr_matrix:
    """Read an edge list back into a symmetric sparse adjacency matrix."""
    rows: list[int] = []
    cols: list[int] = []
    weights: list[float] = []
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 3:
                raise DatasetFormatError(str(path), "expected 'i j w'", line=line_no)
            try:
                rows.append(int(parts[0]))
                cols.append(int(parts[1]))
                weights.append(float(parts[2]))
            except ValueError as e:
                raise DatasetFormatError(str(path), str(e), line=line_no) from e

    size = n if n is not None else (max(max(rows), max(cols)) + 1 if rows else 0)
    upper = sparse.csr_matrix((weights, (rows, cols)), shape=(size, size))
    adjacency = (upper + upper.T).tocsr()
    adjacency.sort_indices()
    return adjacency
