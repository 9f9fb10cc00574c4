"""k-NN similarity graph and expanded adjacency indicator."""

from src.graph.adjacency import (
    AdjacencyIndicator,
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

__all__ = [
    "AdjacencyIndicator",
    "KnnGraph",
    "KnnLists",
    "build_knn_graph",
    "default_theta",
    "estimate_sigma",
    "expand_adjacency",
    "load_edge_list",
    "neighborhood_average",
    "neighborhood_averages",
    "pairwise_knn",
    "save_edge_list",
]
