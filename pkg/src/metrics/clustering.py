"""External clustering metrics: NMI, ACC and ARI."""

from dataclasses import dataclass
from typing import Literal

import numpy as np
from pydantic import BaseModel
from scipy.optimize import linear_sum_assignment
from sklearn.metrics import adjusted_rand_score, normalized_mutual_info_score
from sklearn.metrics.cluster import contingency_matrix

from src.core.exceptions import DegenerateInputError

NmiAverage = Literal["arithmetic", "geometric"]


def _check_pair(pred: np.ndarray, true: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    pred = np.asarray(pred).ravel()
    true = np.asarray(true).ravel()
    if pred.shape != true.shape:
        raise DegenerateInputError(
            f"label vectors differ in length: {pred.shape[0]} != {true.shape[0]}"
        )
    if pred.size == 0:
        raise DegenerateInputError("label vectors are empty")
    return pred, true


@dataclass(frozen=True, eq=False)
class Contingency:
    """Co-occurrence counts of predicted clusters (rows) and true classes (columns)."""

    counts: np.ndarray

    @classmethod
    def from_labels(cls, pred: np.ndarray, true: np.ndarray) -> "Contingency":
        pred, true = _check_pair(pred, true)
        return cls(counts=np.asarray(contingency_matrix(pred, true), dtype=np.int64))

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def row_sums(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def column_sums(self) -> np.ndarray:
        return self.counts.sum(axis=0)


def nmi(pred: np.ndarray, true: np.ndarray, average: NmiAverage = "arithmetic") -> float:
    """Mutual information normalised by the mean of the two entropies.

    Two single-cluster labelings score 1.0.
    """
    pred, true = _check_pair(pred, true)
    return float(normalized_mutual_info_score(true, pred, average_method=average))


def acc(pred: np.ndarray, true: np.ndarray) -> float:
    """Fraction matched under the best one-to-one cluster-to-class mapping."""
    table = Contingency.from_labels(pred, true)
    rows, cols = linear_sum_assignment(table.counts, maximize=True)
    return float(table.counts[rows, cols].sum()) / table.n


def ari(pred: np.ndarray, true: np.ndarray) -> float:
    """Adjusted Rand index over sample pairs."""
    pred, true = _check_pair(pred, true)
    return float(adjusted_rand_score(true, pred))


class ClusteringScores(BaseModel):
    nmi: float
    acc: float
    ari: float


def evaluate(
    pred: np.ndarray, true: np.ndarray, average: NmiAverage = "arithmetic"
) -> ClusteringScores:
    """All three metrics for one labeling."""
    return ClusteringScores(
        nmi=nmi(pred, true, average), acc=acc(pred, true), ari=ari(pred, true)
    )
