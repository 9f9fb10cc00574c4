"""Gauss-Seidel sweep over one mini-batch."""

import numba
import numpy as np


@numba.njit(cache=True, nogil=True)
def sweep_batch(
    batch,
    in_batch,
    adj_indptr,
    adj_indices,
    w_indptr,
    w_indices,
    w_data,
    degrees,
    probs,
    labels,
    p_tilde,
    v_tilde,
    alpha,
    m,
    beta,
    use_hard,
    s_p_log,
    s_v_log,
):  # pragma: no cover - exercised through run_epoch
    """Update every sample of ``batch`` in order, in place.

    ``p_tilde``/``v_tilde`` hold the column sums of ``probs`` and of the
    one-hot ``labels`` on entry and are kept current on exit. Returns the
    number of hard labels that changed.

    When ``s_p_log`` has rows, row t of ``s_p_log``/``s_v_log`` receives the
    unguarded scores of ``batch[t]``.
    """
    c = probs.shape[1]
    exponent = 1.0 / (m - 1.0)
    keep = 1.0 / (1.0 + beta)
    mix = beta / (1.0 + beta)

    s_p = np.empty(c)
    s_v = np.empty(c)
    p_new = np.empty(c)
    p_bar = np.empty(c)
    changed = 0
    record = s_p_log.shape[0] > 0

    for t in range(batch.shape[0]):
        i = batch[t]
        old = labels[i]
        for col in range(c):
            p_tilde[col] -= probs[i, col]
        v_tilde[old] -= 1.0

        for col in range(c):
            s_p[col] = p_tilde[col]
            s_v[col] = v_tilde[col]
        for e in range(adj_indptr[i], adj_indptr[i + 1]):
            j = adj_indices[e]
            if in_batch[j]:
                s_p[labels[j]] -= alpha
                for col in range(c):
                    s_v[col] -= alpha * probs[j, col] ** m
        if record:
            for col in range(c):
                s_p_log[t, col] = s_p[col]
                s_v_log[t, col] = s_v[col]

        # Guard: min(s_p) becomes 1
        low = s_p[0]
        for col in range(1, c):
            if s_p[col] < low:
                low = s_p[col]
        top = -np.inf
        for col in range(c):
            p_new[col] = -exponent * np.log(s_p[col] - low + 1.0)
            if p_new[col] > top:
                top = p_new[col]
        total = 0.0
        for col in range(c):
            p_new[col] = np.exp(p_new[col] - top)
            total += p_new[col]
        for col in range(c):
            p_new[col] /= total

        if beta > 0.0:
            for col in range(c):
                p_bar[col] = 0.0
            for e in range(w_indptr[i], w_indptr[i + 1]):
                j = w_indices[e]
                w = w_data[e]
                for col in range(c):
                    p_bar[col] += w * probs[j, col]
            for col in range(c):
                probs[i, col] = p_new[col] * keep + mix * (p_bar[col] / degrees[i])
        else:
            for col in range(c):
                probs[i, col] = p_new[col]

        if use_hard:
            new = np.argmin(s_v)
        else:
            new = np.argmax(probs[i])
        labels[i] = new
        if new != old:
            changed += 1

        for col in range(c):
            p_tilde[col] += probs[i, col]
        v_tilde[new] += 1.0

    return changed
