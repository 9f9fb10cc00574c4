"""GPAC objective Tr(V'HV + P'HP^m - alpha V'W^P^m) with H = 11' - I."""

import numpy as np

from src.core.models import FuzzyPartition, HardPartition
from src.graph.adjacency import AdjacencyIndicator


def hard_self_term(assignment: HardPartition) -> float:
    """Tr(V'HV) = sum_l (column sum of V)^2 - n."""
    counts = assignment.counts().astype(np.float64)
    return float(counts @ counts - assignment.n)


def fuzzy_self_term(partition: FuzzyPartition, m: float) -> float:
    """Tr(P'HP^m) = sum_l (sum_i p_il)(sum_j p_jl^m) - sum_i p_il p_il^m."""
    probs = partition.probs
    powered = np.power(probs, m)
    return float(probs.sum(axis=0) @ powered.sum(axis=0) - np.sum(probs * powered))


def cross_term(
    partition: FuzzyPartition,
    assignment: HardPartition,
    adjacency: AdjacencyIndicator,
    m: float,
    sample_rows: np.ndarray | None = None,
) -> float:
    """Tr(V'W^P^m); over ``sample_rows`` only, rescaled to n rows, when given."""
    powered = np.power(partition.probs, m)
    matrix = adjacency.matrix
    labels = assignment.labels
    if sample_rows is None:
        votes = matrix @ powered
        return float(votes[np.arange(assignment.n), labels].sum())

    rows = np.asarray(sample_rows, dtype=np.int64)
    votes = matrix[rows] @ powered
    total = float(votes[np.arange(rows.size), labels[rows]].sum())
    return total * assignment.n / rows.size


def objective_value(
    partition: FuzzyPartition,
    assignment: HardPartition,
    adjacency: AdjacencyIndicator,
    alpha: float,
    m: float,
    sample_rows: np.ndarray | None = None,
) -> float:
    """Evaluate the objective through column-sum identities, never forming H."""
    return (
        hard_self_term(assignment)
        + fuzzy_self_term(partition, m)
        - alpha * cross_term(partition, assignment, adjacency, m, sample_rows)
    )
