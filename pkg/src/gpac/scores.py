"""Per-sample closed-form updates of the fuzzy and hard assignments.

These are the reference forms of the steps the JIT sweep in
``src.gpac.kernels`` performs inline.
"""

from dataclasses import dataclass

import numpy as np

from src.core.exceptions import NumericalError


@dataclass(frozen=True, eq=False)
class ScorePair:
    """Fuzzy score s_p and hard score s_v of one sample."""

    s_p: np.ndarray
    s_v: np.ndarray


def compute_scores(
    i: int,
    neighbors: np.ndarray,
    p_tilde: np.ndarray,
    v_tilde: np.ndarray,
    probs: np.ndarray,
    labels: np.ndarray,
    alpha: float,
    m: float,
) -> ScorePair:
    """Scores of sample ``i`` from aggregates that already exclude ``i``.

    s_p = P~ - alpha * (one-hot votes of the neighbours' hard labels)
    s_v = V~ - alpha * (sum of the neighbours' p ** m)
    """
    neighbors = np.asarray(neighbors, dtype=np.int64)
    neighbors = neighbors[neighbors != i]
    c = p_tilde.shape[0]

    votes = np.bincount(labels[neighbors], minlength=c).astype(np.float64)
    powered = np.power(probs[neighbors], m).sum(axis=0) if neighbors.size else np.zeros(c)

    return ScorePair(s_p=p_tilde - alpha * votes, s_v=v_tilde - alpha * powered)


def guard_scores(s_p: np.ndarray) -> np.ndarray:
    """Shift scores so the minimum is exactly 1."""
    s_p = np.asarray(s_p, dtype=np.float64)
    return s_p - s_p.min() + 1.0


def fuzzy_from_scores(s_p: np.ndarray, m: float) -> np.ndarray:
    """Normalised inverse power s ** (-1/(m-1)), evaluated in the log domain."""
    s_p = np.asarray(s_p, dtype=np.float64)
    if np.any(s_p <= 0.0):
        raise NumericalError("fuzzy scores must be positive; apply guard_scores first")

    logits = -(1.0 / (m - 1.0)) * np.log(s_p)
    weights = np.exp(logits - logits.max())
    p_star = weights / weights.sum()
    if not np.all(np.isfinite(p_star)):
        raise NumericalError(f"non-finite membership from scores {s_p.tolist()} at m={m}")
    return p_star


def project_local_consistency(p_star: np.ndarray, p_bar: np.ndarray, beta: float) -> np.ndarray:
    """Minimiser of |p - p*|^2 + beta |p - p_bar|^2 on the simplex."""
    return p_star * (1.0 / (1.0 + beta)) + (beta / (1.0 + beta)) * p_bar


def hard_from_scores(s_v: np.ndarray) -> int:
    """Cluster with the smallest hard score; lowest index wins ties."""
    return int(np.argmin(s_v))
