"""Tests for k-NN graph construction and adjacency expansion."""

import numpy as np
import pytest
from scipy import sparse

from src.core.exceptions import ConfigError, DatasetFormatError, DegenerateInputError
from src.core.models import Dataset, FuzzyPartition
from src.graph.adjacency import (
    default_theta,
    expand_adjacency,
    neighborhood_average,
    neighborhood_averages,
)
from src.graph.knn import (
    KnnGraph,
    KnnLists,
    build_knn_graph,
    estimate_sigma,
    load_edge_list,
    pairwise_knn,
    save_edge_list,
)


def graph_from_edges(n, edges):
    """Unit-weight symmetric graph from an edge list."""
    rows = [i for i, _ in edges] + [j for _, j in edges]
    cols = [j for _, j in edges] + [i for i, _ in edges]
    adjacency = sparse.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    return KnnGraph.from_adjacency(adjacency, sigma=1.0, k=1)


def dense_reach(graph, theta):
    """Support of (W + I)^theta minus the diagonal, by dense boolean powers."""
    step = (graph.adjacency.toarray() > 0) | np.eye(graph.n, dtype=bool)
    reach = np.eye(graph.n, dtype=bool)
    for _ in range(theta):
        reach = (reach.astype(int) @ step.astype(int)) > 0
    np.fill_diagonal(reach, False)
    return reach


def as_dense(indicator):
    return indicator.matrix.toarray() > 0


def test_pairwise_knn_collinear():
    """Test 3 collinear points at 0, 1, 3 with k=1."""
    data = Dataset(features=[[0.0], [1.0], [3.0]])
    knn = pairwise_knn(data, 1)
    assert knn.indices[:, 0].tolist() == [1, 0, 1]
    assert knn.sq_distances[:, 0].tolist() == [1.0, 1.0, 4.0]


def test_pairwise_knn_complete(random_data):
    """Test k = n - 1 lists every other sample."""
    n = random_data.n
    knn = pairwise_knn(random_data, n - 1)
    for i in range(n):
        assert sorted(knn.indices[i].tolist()) == [j for j in range(n) if j != i]
    assert np.all(np.diff(knn.sq_distances, axis=1) >= 0.0)


def test_pairwise_knn_duplicates_break_ties_by_index():
    """Test duplicate points give distance 0 and lower index first."""
    data = Dataset(features=[[0.0], [5.0], [0.0], [0.0]])
    knn = pairwise_knn(data, 2)
    assert knn.indices[0].tolist() == [2, 3]
    assert knn.indices[3].tolist() == [0, 2]
    assert knn.sq_distances[0].tolist() == [0.0, 0.0]


def test_pairwise_knn_matches_brute_force(monkeypatch, random_data):
    """Test block-wise search with tiny blocks equals a full sort."""
    from src.core.config import settings

    monkeypatch.setattr(settings, "knn_chunk_bytes", 1024)
    knn = pairwise_knn(random_data, 7)
    x = random_data.features
    d2 = ((x[:, None, :] - x[None, :, :]) ** 2).sum(axis=2)
    np.fill_diagonal(d2, np.inf)
    expected = np.argsort(d2, axis=1, kind="stable")[:, :7]
    np.testing.assert_array_equal(knn.indices, expected)


@pytest.mark.parametrize("k", [0, 50, 60])
def test_pairwise_knn_rejects_k(random_data, k):
    """Test 1 <= k < n."""
    with pytest.raises(ConfigError):
        pairwise_knn(random_data, k)


def test_estimate_sigma():
    """Test sigma is the mean k-th squared distance."""
    knn = KnnLists(indices=np.array([[1], [0]]), sq_distances=np.array([[1.0], [3.0]]))
    assert estimate_sigma(knn) == 2.0
    constant = KnnLists(indices=np.zeros((4, 2), dtype=int), sq_distances=np.full((4, 2), 0.7))
    assert estimate_sigma(constant) == pytest.approx(0.7)


def test_estimate_sigma_coincident():
    """Test coincident data asks for an explicit sigma."""
    data = Dataset(features=np.ones((5, 2)))
    with pytest.raises(DegenerateInputError, match="sigma"):
        estimate_sigma(pairwise_knn(data, 2))
    graph = build_knn_graph(data, 2, sigma=1.0)
    assert np.all(graph.adjacency.data == 1.0)


def test_build_knn_graph_invariants(random_data):
    """Test symmetry, zero diagonal, weight range and degrees."""
    k = 5
    graph = build_knn_graph(random_data, k)
    w = graph.adjacency
    assert abs(w - w.T).max() == 0.0
    assert np.all(w.diagonal() == 0.0)
    assert np.all((w.data > 0.0) & (w.data <= 1.0))
    nnz = np.diff(w.indptr)
    assert np.all((nnz >= k) & (nnz <= random_data.n - 1))
    np.testing.assert_allclose(graph.degrees, np.asarray(w.sum(axis=1)).ravel())
    assert np.all(graph.degrees > 0.0)


def test_build_knn_graph_kernel_value():
    """Test |xi - xj|^2 = 2 sigma gives weight e^-1."""
    data = Dataset(features=[[0.0], [1.0], [10.0]])
    graph = build_knn_graph(data, 1, sigma=0.5)
    assert graph.adjacency[0, 1] == pytest.approx(np.exp(-1.0))


def test_build_knn_graph_union():
    """Test a one-sided neighbour relation yields an edge both ways."""
    data = Dataset(features=[[0.0], [1.0], [3.0]])
    graph = build_knn_graph(data, 1, sigma=1.0)
    # 2 -> 1 but 1 -> 0
    assert graph.adjacency[1, 2] > 0.0
    assert graph.adjacency[2, 1] == graph.adjacency[1, 2]
    assert graph.adjacency[0, 2] == 0.0


def test_build_knn_graph_floors_underflow():
    """Test far neighbours keep a positive weight."""
    data = Dataset(features=[[0.0], [1e-3], [1e6], [1e6 + 1e-3]])
    graph = build_knn_graph(data, 2, sigma=1e-6)
    assert np.all(graph.adjacency.data > 0.0)
    assert graph.adjacency[0, 2] > 0.0


@pytest.mark.parametrize(
    ("n", "c", "k", "expected"),
    [
        (10992, 10, 10, 4),
        (1000, 10, 10, 2),
        (100, 10, 10, 1),
        (50, 10, 10, 1),
        (1001, 10, 10, 3),
        (100, 5, 1, 1),
    ],
)
def test_default_theta(n, c, k, expected):
    """Test ceil(log_k(n / c)) with a floor of 1."""
    assert default_theta(n, c, k) == expected


def test_expand_adjacency_path():
    """Test path graph 0-1-2 with theta=2."""
    graph = graph_from_edges(3, [(0, 1), (1, 2)])
    one = expand_adjacency(graph, 1)
    assert one.neighbors(0).tolist() == [1]
    two = expand_adjacency(graph, 2)
    assert two.neighbors(0).tolist() == [1, 2]
    assert two.neighbors(2).tolist() == [0, 1]


def test_expand_adjacency_complete():
    """Test a complete graph closes to all other samples."""
    n = 6
    graph = graph_from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])
    for theta in (1, 3):
        indicator = expand_adjacency(graph, theta)
        for i in range(n):
            assert indicator.neighbors(i).tolist() == [j for j in range(n) if j != i]


def test_expand_adjacency_rejects_theta():
    """Test theta >= 1."""
    graph = graph_from_edges(2, [(0, 1)])
    with pytest.raises(ConfigError):
        expand_adjacency(graph, 0)


@pytest.mark.parametrize("seed", range(20))
def test_expand_adjacency_matches_dense(seed):
    """Test BFS expansion against boolean matrix powers."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(8, 40))
    data = Dataset(features=rng.normal(size=(n, 2)))
    graph = build_knn_graph(data, int(rng.integers(1, 4)))

    previous = None
    for theta in (1, 2, 3):
        indicator = expand_adjacency(graph, theta)
        reach = as_dense(indicator)
        np.testing.assert_array_equal(reach, dense_reach(graph, theta))
        assert not reach.diagonal().any()
        np.testing.assert_array_equal(reach, reach.T)
        if theta == 1:
            np.testing.assert_array_equal(reach, graph.adjacency.toarray() > 0)
        if previous is not None:
            assert np.all(reach[previous])
        previous = reach
        for i in range(n):
            assert np.all(np.diff(indicator.neighbors(i)) > 0)


def test_expand_adjacency_pure_python_matches_jit(no_jit, random_data):
    """Test the uncompiled kernel gives the same sets."""
    graph = build_knn_graph(random_data, 3)
    indicator = expand_adjacency(graph, 2)
    np.testing.assert_array_equal(as_dense(indicator), dense_reach(graph, 2))


def test_neighborhood_average_examples():
    """Test weighted mean examples."""
    graph = graph_from_edges(3, [(0, 1), (0, 2)])
    split = FuzzyPartition(probs=[[0.5, 0.5], [1.0, 0.0], [0.0, 1.0]])
    np.testing.assert_allclose(neighborhood_average(graph, split, 0), [0.5, 0.5])

    same = FuzzyPartition(probs=[[0.1, 0.9], [0.3, 0.7], [0.3, 0.7]])
    np.testing.assert_allclose(neighborhood_average(graph, same, 0), [0.3, 0.7])

    uniform = FuzzyPartition(probs=np.full((3, 4), 0.25))
    np.testing.assert_allclose(neighborhood_average(graph, uniform, 1), [0.25] * 4)


def test_neighborhood_averages_convex(random_data):
    """Test all averages stay on the simplex and match the per-sample form."""
    graph = build_knn_graph(random_data, 4)
    rng = np.random.default_rng(5)
    probs = rng.dirichlet(np.ones(3), size=random_data.n)
    partition = FuzzyPartition(probs=probs)
    averages = neighborhood_averages(graph, probs)
    np.testing.assert_allclose(averages.sum(axis=1), 1.0, atol=1e-12)
    for i in (0, 17, 49):
        np.testing.assert_allclose(averages[i], neighborhood_average(graph, partition, i))


def test_edge_list_round_trip(tmp_path, random_data):
    """Test the sorted edge list restores W exactly."""
    graph = build_knn_graph(random_data, 4)
    path = tmp_path / "graph.txt"
    save_edge_list(graph, path)

    lines = path.read_text().splitlines()
    pairs = [tuple(map(int, line.split()[:2])) for line in lines]
    assert pairs == sorted(pairs)
    assert all(i < j for i, j in pairs)

    restored = load_edge_list(path, n=random_data.n)
    assert abs(restored - graph.adjacency).max() == 0.0


def test_edge_list_malformed(tmp_path):
    """Test malformed lines name the line number."""
    path = tmp_path / "bad.txt"
    path.write_text("0 1 0.5\n1 2\n")
    with pytest.raises(DatasetFormatError, match=":2:"):
        load_edge_list(path)
