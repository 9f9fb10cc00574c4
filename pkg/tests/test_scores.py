"""Tests for the per-sample score and update formulas."""

import itertools

import numpy as np
import pytest

from src.core.exceptions import NumericalError
from src.gpac.scores import (
    compute_scores,
    fuzzy_from_scores,
    guard_scores,
    hard_from_scores,
    project_local_consistency,
)


def dense_scores(i, indicator, probs, labels, alpha, m):
    """Scores straight from the definitions, looping over every other sample."""
    n, c = probs.shape
    s_p = np.zeros(c)
    s_v = np.zeros(c)
    for j in range(n):
        if j == i:
            continue
        one_hot = np.eye(c)[labels[j]]
        s_p += probs[j] - alpha * one_hot * indicator[i, j]
        s_v += one_hot - alpha * np.power(probs[j], m) * indicator[i, j]
    return s_p, s_v


def test_compute_scores_empty_neighborhood():
    """Test an empty neighbourhood leaves the aggregates."""
    p_tilde = np.array([3.0, 5.0])
    v_tilde = np.array([4.0, 4.0])
    probs = np.full((9, 2), 0.5)
    labels = np.zeros(9, dtype=int)
    scores = compute_scores(0, np.array([], dtype=int), p_tilde, v_tilde, probs, labels, 1.0, 1.05)
    np.testing.assert_array_equal(scores.s_p, p_tilde)
    np.testing.assert_array_equal(scores.s_v, v_tilde)


def test_compute_scores_zero_alpha():
    """Test alpha=0 ignores the neighbours."""
    p_tilde = np.array([1.5, 2.5])
    probs = np.array([[0.2, 0.8], [0.9, 0.1], [0.5, 0.5]])
    labels = np.array([1, 0, 0])
    scores = compute_scores(2, np.array([0, 1]), p_tilde, np.array([1.0, 1.0]), probs, labels, 0.0, 2.0)
    np.testing.assert_array_equal(scores.s_p, p_tilde)


@pytest.mark.parametrize("seed", range(10))
def test_compute_scores_matches_dense(seed):
    """Test the aggregate form against the pairwise definitions."""
    rng = np.random.default_rng(seed)
    n = 30
    c = int(rng.choice([2, 3, 5]))
    m = float(rng.uniform(1.05, 2.0))
    alpha = float(rng.uniform(0.5, 2.0))
    probs = rng.dirichlet(np.ones(c), size=n)
    labels = rng.integers(0, c, size=n)
    upper = np.triu(rng.random((n, n)) < 0.2, k=1)
    indicator = (upper | upper.T).astype(float)

    for i in range(n):
        p_tilde = probs.sum(axis=0) - probs[i]
        v_tilde = np.bincount(labels, minlength=c).astype(float)
        v_tilde[labels[i]] -= 1.0
        neighbors = np.flatnonzero(indicator[i])
        scores = compute_scores(i, neighbors, p_tilde, v_tilde, probs, labels, alpha, m)
        s_p, s_v = dense_scores(i, indicator, probs, labels, alpha, m)
        np.testing.assert_allclose(scores.s_p, s_p, rtol=1e-12, atol=1e-12)
        np.testing.assert_allclose(scores.s_v, s_v, rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize(
    ("scores", "expected"),
    [([-0.5, 2.0], [1.0, 3.5]), ([1.0, 1.0, 1.0], [1.0, 1.0, 1.0]), ([5.0, 7.0], [1.0, 3.0])],
)
def test_guard_scores(scores, expected):
    """Test the shift puts the minimum at exactly 1."""
    guarded = guard_scores(np.array(scores))
    np.testing.assert_array_equal(guarded, expected)
    assert guarded.min() == 1.0


def test_guard_preserves_order():
    """Test the guard keeps the ranking of clusters."""
    scores = np.random.default_rng(4).normal(size=12) * 50
    np.testing.assert_array_equal(np.argsort(guard_scores(scores)), np.argsort(scores))


def test_fuzzy_from_scores_examples():
    """Test the normalised inverse power."""
    np.testing.assert_allclose(fuzzy_from_scores(np.array([1.0, 3.0]), 2.0), [0.75, 0.25])
    np.testing.assert_allclose(fuzzy_from_scores(np.full(4, 7.0), 1.3), [0.25] * 4)

    sharp = fuzzy_from_scores(np.array([1.0, 2.0]), 1.05)
    assert sharp[1] == pytest.approx(2.0**-20 / (1.0 + 2.0**-20), rel=1e-12)
    assert sharp.sum() == pytest.approx(1.0, abs=1e-15)


def test_fuzzy_from_scores_decreasing():
    """Test larger scores get smaller memberships."""
    scores = np.array([1.0, 1.5, 4.0, 9.0])
    p_star = fuzzy_from_scores(scores, 1.2)
    assert np.all(np.diff(p_star) < 0.0)


def test_fuzzy_from_scores_extreme_range_is_finite():
    """Test log-domain evaluation survives huge score ratios."""
    p_star = fuzzy_from_scores(np.array([1.0, 1e300]), 1.015625)
    assert np.all(np.isfinite(p_star))
    assert p_star[0] == 1.0


def test_fuzzy_from_scores_rejects_unguarded():
    """Test non-positive scores are refused."""
    with pytest.raises(NumericalError):
        fuzzy_from_scores(np.array([0.0, 1.0]), 2.0)


def test_sharpening_monotone_in_m():
    """Test max membership grows as m decreases toward 1."""
    scores = np.array([1.0, 1.3, 2.0])
    peaks = [fuzzy_from_scores(scores, m).max() for m in (3.0, 2.0, 1.5, 1.2, 1.1, 1.05)]
    assert all(b > a for a, b in itertools.pairwise(peaks))


def test_project_local_consistency_examples():
    """Test the convex combination."""
    p_star = np.array([0.75, 0.25])
    p_bar = np.array([0.5, 0.5])
    np.testing.assert_array_equal(project_local_consistency(p_star, p_bar, 0.0), p_star)
    np.testing.assert_allclose(project_local_consistency(p_star, p_bar, 1.0), [0.625, 0.375])
    np.testing.assert_allclose(project_local_consistency(p_star, p_bar, 1e12), p_bar, atol=1e-9)


@pytest.mark.parametrize("c", [2, 3])
def test_projection_minimises_penalised_distance(c):
    """Test the projection beats every point of a simplex grid."""
    rng = np.random.default_rng(c)
    p_star = rng.dirichlet(np.ones(c))
    p_bar = rng.dirichlet(np.ones(c))
    beta = 0.7

    def cost(p):
        return np.sum((p - p_star) ** 2) + beta * np.sum((p - p_bar) ** 2)

    best = project_local_consistency(p_star, p_bar, beta)
    assert best.sum() == pytest.approx(1.0)
    steps = np.linspace(0.0, 1.0, 201)
    for point in itertools.product(steps, repeat=c - 1):
        last = 1.0 - sum(point)
        if last < -1e-12:
            continue
        assert cost(best) <= cost(np.array([*point, last])) + 1e-12


@pytest.mark.parametrize(
    ("scores", "expected"), [([2.0, 1.0, 3.0], 1), ([1.0, 1.0], 0), ([0.5, -2.0, -2.0], 1)]
)
def test_hard_from_scores(scores, expected):
    """Test argmin with lowest-index ties."""
    assert hard_from_scores(np.array(scores)) == expected
    assert hard_from_scores(np.array(scores) + 17.5) == expected


def test_uniform_is_stationary_without_constraints():
    """Test uniform P is a fixed point of the fuzzy update when alpha = beta = 0."""
    n, c = 12, 3
    probs = np.full((n, c), 1.0 / c)
    labels = np.arange(n) % c
    for i in range(n):
        p_tilde = probs.sum(axis=0) - probs[i]
        v_tilde = np.bincount(labels, minlength=c).astype(float)
        v_tilde[labels[i]] -= 1.0
        scores = compute_scores(i, np.arange(n), p_tilde, v_tilde, probs, labels, 0.0, 1.05)
        p_star = fuzzy_from_scores(guard_scores(scores.s_p), 1.05)
        update = project_local_consistency(p_star, probs[i], 0.0)
        np.testing.assert_allclose(update, probs[i], atol=1e-15)


@pytest.mark.parametrize("m", [1.05, 1.5, 2.0])
def test_uniform_minimises_row_self_term(m):
    """Test sum_l p_l^m (column sums of the others) is smallest at uniform p."""
    c, n, steps = 3, 10, 60
    others = np.full(c, (n - 1) / c)

    def row_term(p):
        return float(np.sum(np.power(p, m) * others))

    uniform = row_term(np.full(c, 1.0 / c))
    for a in range(steps + 1):
        for b in range(steps + 1 - a):
            point = np.array([a, b, steps - a - b], dtype=float) / steps
            value = row_term(point)
            assert np.isfinite(value)
            assert uniform <= value + 1e-12


@pytest.mark.parametrize("seed", range(20))
def test_projection_keeps_crisp_argmax_below_beta_one(seed):
    """Test beta < 1 never moves the argmax of a crisp update, while beta > 1 can."""
    rng = np.random.default_rng(seed)
    c = 4
    s_p = rng.permutation([1.0, 3.0, 5.0, 9.0])
    p_star = fuzzy_from_scores(s_p, 1.05)
    top = int(np.argmax(p_star))
    p_bar = np.eye(c)[(top + 1) % c]
    for beta in (0.25, 0.5, 0.9):
        assert int(np.argmax(project_local_consistency(p_star, p_bar, beta))) == top
    assert int(np.argmax(project_local_consistency(p_star, p_bar, 4.0))) == (top + 1) % c
