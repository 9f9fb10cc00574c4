"""Clustering evaluation metrics."""

from src.metrics.clustering import ClusteringScores, Contingency, acc, ari, evaluate, nmi

__all__ = ["ClusteringScores", "Contingency", "acc", "ari", "evaluate", "nmi"]
