"""Core data models."""

from dataclasses import dataclass
from enum import Enum

import numpy as np
from pydantic import BaseModel, Field, model_validator

from src.core.exceptions import DegenerateInputError

# Stochasticity tolerance for probability rows
ROW_SUM_TOL = 1e-9


class InitMode(str, Enum):
    """Hard assignment initialisation strategies."""

    KMEANSPP = "kmeanspp"
    RANDOM = "random"
    ZERO = "zero"


class Method(str, Enum):
    """Clustering methods runnable from the command line."""

    GPAC = "gpac"
    KMEANS = "kmeans"
    FCM = "fcm"
    FCM_LCC = "fcm-lcc"


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Dataset:
    """Dense feature matrix with optional ground-truth labels."""

    features: np.ndarray
    labels: np.ndarray | None = None
    name: str = "dataset"

    def __post_init__(self) -> None:
        features = np.asarray(self.features, dtype=np.float64)
        if features.ndim != 2:
            raise DegenerateInputError(f"features must be 2-D, got shape {features.shape}")
        n, d = features.shape
        if n < 2 or d < 1:
            raise DegenerateInputError(f"need n >= 2 and d >= 1, got n={n}, d={d}")
        if not np.all(np.isfinite(features)):
            raise DegenerateInputError("features contain non-finite values")
        object.__setattr__(self, "features", _frozen(features))

        if self.labels is not None:
            labels = np.asarray(self.labels)
            if labels.shape != (n,):
                raise DegenerateInputError(
                    f"labels must have shape ({n},), got {labels.shape}"
                )
            if not np.issubdtype(labels.dtype, np.integer):
                if not np.all(np.mod(labels, 1) == 0):
                    raise DegenerateInputError("labels must be integers")
            object.__setattr__(self, "labels", _frozen(labels.astype(np.int64)))

    @property
    def n(self) -> int:
        return int(self.features.shape[0])

    @property
    def d(self) -> int:
        return int(self.features.shape[1])

    def subset(self, indices: np.ndarray, name: str | None = None) -> "Dataset":
        """Dataset restricted to the given sample indices."""
        return Dataset(
            features=self.features[indices],
            labels=None if self.labels is None else self.labels[indices],
            name=name or self.name,
        )


@dataclass(frozen=True, eq=False)
class HardPartition:
    """Hard cluster assignment stored as a label vector (the one-hot V)."""

    labels: np.ndarray
    c: int

    def __post_init__(self) -> None:
        labels = np.asarray(self.labels)
        if labels.ndim != 1:
            raise DegenerateInputError("labels must be a vector")
        if labels.size and (labels.min() < 0 or labels.max() >= self.c):
            raise DegenerateInputError(f"cluster ids must lie in [0, {self.c})")
        object.__setattr__(self, "labels", _frozen(labels.astype(np.int64)))

    @property
    def n(self) -> int:
        return int(self.labels.shape[0])

    def one_hot(self) -> np.ndarray:
        """Materialise V as an n x c 0/1 matrix."""
        matrix = np.zeros((self.n, self.c), dtype=np.float64)
        matrix[np.arange(self.n), self.labels] = 1.0
        return matrix

    @classmethod
    def from_one_hot(cls, matrix: np.ndarray) -> "HardPartition":
        """Recover the label vector from a one-hot matrix."""
        matrix = np.asarray(matrix)
        if not np.all(matrix.sum(axis=1) == 1) or not np.all((matrix == 0) | (matrix == 1)):
            raise DegenerateInputError("matrix is not one-hot")
        return cls(labels=np.argmax(matrix, axis=1), c=matrix.shape[1])

    def counts(self) -> np.ndarray:
        """Column sums of V."""
        return np.bincount(self.labels, minlength=self.c)


@dataclass(frozen=True, eq=False)
class FuzzyPartition:
    """Row-stochastic membership matrix P."""

    probs: np.ndarray

    def __post_init__(self) -> None:
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.ndim != 2:
            raise DegenerateInputError("probability matrix must be 2-D")
        if not np.all(np.isfinite(probs)):
            raise DegenerateInputError("probability matrix contains non-finite values")
        if probs.size and (probs.min() < 0.0 or probs.max() > 1.0 + ROW_SUM_TOL):
            raise DegenerateInputError("probabilities must lie in [0, 1]")
        if not np.allclose(probs.sum(axis=1), 1.0, rtol=0.0, atol=ROW_SUM_TOL):
            raise DegenerateInputError("probability rows must sum to 1")
        object.__setattr__(self, "probs", _frozen(probs))

    @property
    def n(self) -> int:
        return int(self.probs.shape[0])

    @property
    def c(self) -> int:
        return int(self.probs.shape[1])

    def column_sums(self) -> np.ndarray:
        return self.probs.sum(axis=0)

    @property
    def is_feasible(self) -> bool:
        """Every column sum strictly between 0 and n."""
        sums = self.column_sums()
        return bool(np.all(sums > 0.0) and np.all(sums < self.n))

    def argmax(self) -> HardPartition:
        """Most probable cluster per sample."""
        return HardPartition(labels=np.argmax(self.probs, axis=1), c=self.c)


class GpacConfig(BaseModel):
    """GPAC hyperparameters (defaults follow the published parameter settings)."""

    model_config = {"frozen": True}

    c: int = Field(..., ge=2, description="Number of clusters")
    m: float = Field(default=1.05, gt=1.0, description="Fuzzy weighting exponent")
    alpha: float = Field(default=1.0, gt=0.0, description="Self-constraint weight")
    beta_max: float = Field(default=1.0, ge=0.0, description="Local-consistency ceiling")
    beta_ramp_epochs: int = Field(default=10, ge=0)
    k: int = Field(default=10, ge=1, description="Neighbours in the k-NN graph")
    theta_override: int | None = Field(default=None, ge=1)
    sigma: float | None = Field(default=None, gt=0.0, description="Kernel bandwidth")
    batch_size: int = Field(default=1024, ge=1)
    max_epochs: int = Field(default=100, ge=0)
    convergence_tol: float = Field(default=0.001, ge=0.0, le=1.0)
    seed: int = Field(default=0, ge=0)
    init_mode: InitMode = InitMode.KMEANSPP
    use_hard_assignment: bool = True
    # Upper bound on 1/(m-1), the magnitude of the score exponent
    max_sharpness: float = Field(default=64.0, gt=0.0)

    @model_validator(mode="after")
    def _check_sharpness(self) -> "GpacConfig":
        if 1.0 / (self.m - 1.0) > self.max_sharpness:
            raise ValueError(
                f"m={self.m} gives exponent 1/(m-1) above max_sharpness={self.max_sharpness}"
            )
        return self

    def beta_at(self, epoch: int) -> float:
        """Local-consistency weight for a zero-based epoch index."""
        if self.beta_ramp_epochs == 0:
            return self.beta_max
        return self.beta_max * min(1.0, epoch / self.beta_ramp_epochs)


class TraceRecord(BaseModel):
    """One optimizer epoch as written to ``trace.ldj``."""

    epoch: int
    objective: float
    labels_changed: int
    beta: float
    elapsed_ms: float


@dataclass
class Timings:
    """Wall-clock timings in milliseconds."""

    graph_ms: float = 0.0
    optimize_ms: float = 0.0
    total_ms: float = 0.0
