"""Configuration checks and probability normalisation."""

import numpy as np
import structlog

from src.core.exceptions import ConfigError, DegenerateInputError
from src.core.models import Dataset, FuzzyPartition, GpacConfig

logger = structlog.get_logger()


def validate_config(config: GpacConfig, data: Dataset) -> GpacConfig:
    """Check a configuration against a dataset and clamp the batch size to n.

    Constraints that do not depend on the data are enforced when the
    ``GpacConfig`` is constructed; this function re-checks them so that configs
    built with ``model_construct`` cannot slip through.
    """
    n = data.n
    if config.m <= 1.0:
        raise ConfigError(f"m must be > 1 (exponent -1/(m-1) undefined), got {config.m}")
    if config.c < 2 or config.c > n:
        raise ConfigError(f"cluster count c={config.c} must lie in [2, n={n}]")
    if config.k < 1 or config.k >= n:
        raise ConfigError(f"neighbour count k={config.k} must satisfy 1 <= k < n={n}")
    if config.batch_size < 1:
        raise ConfigError(f"batch_size must be >= 1, got {config.batch_size}")
    if config.alpha <= 0.0:
        raise ConfigError(f"alpha must be > 0, got {config.alpha}")
    if config.beta_max < 0.0:
        raise ConfigError(f"beta_max must be >= 0, got {config.beta_max}")
    if not 0.0 <= config.convergence_tol <= 1.0:
        raise ConfigError(f"convergence_tol must lie in [0, 1], got {config.convergence_tol}")

    if config.batch_size > n:
        logger.debug("Clamping batch size", batch_size=config.batch_size, n=n)
        config = config.model_copy(update={"batch_size": n})
    return config


def row_normalize(matrix: np.ndarray) -> FuzzyPartition:
    """Divide every row of a nonnegative matrix by its sum."""
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2:
        raise DegenerateInputError("row_normalize expects a 2-D matrix")
    if not np.all(np.isfinite(matrix)):
        raise DegenerateInputError("matrix contains non-finite values")
    if np.any(matrix < 0.0):
        raise DegenerateInputError("matrix contains negative values")
    sums = matrix.sum(axis=1, keepdims=True)
    zero_rows = np.flatnonzero(sums[:, 0] <= 0.0)
    if zero_rows.size:
        raise DegenerateInputError(f"row {int(zero_rows[0])} sums to zero")
    return FuzzyPartition(probs=matrix / sums)
