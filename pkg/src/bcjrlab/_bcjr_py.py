"""NumPy implementation of the BCJR recursions.

Used when the compiled ``_bcjr_ext`` module is unavailable, and as the
reference the compiled kernel is tested against.
"""
import numpy as np

from .errors import NumericalError


def _normalize(row, t, which):
    total = row.sum()
    if not total > 0 or not np.isfinite(total):
        raise NumericalError(f"{which} message at t={t} vanished (sum={total})")
    return row / total


def forward(values):
    T, n = values.shape
    pred = (np.arange(n) << 1) & (n - 1)
    alpha = np.empty((T, n))
    prev = np.full(n, 1.0 / n)
    for t in range(T):
        cur = 0.5 * values[t] * (prev[pred] + prev[pred | 1])
        prev = alpha[t] = _normalize(cur, t, "forward")
    return alpha


def backward(values):
    T, n = values.shape
    half = n >> 1
    lo = np.arange(n) >> 1
    hi = lo | half
    beta = np.empty((T, n))
    beta[T - 1] = 1.0 / n
    for t in range(T - 2, -1, -1):
        w = 0.5 * values[t + 1] * beta[t + 1]
        beta[t] = _normalize(w[lo] + w[hi], t, "backward")
    return beta


def posteriors(alpha, beta):
    """Per-symbol posteriors ``(T, 2)`` with columns for -1 and +1."""
    n = alpha.shape[1]
    joint = alpha * beta
    post = np.stack([joint[:, :n >> 1].sum(axis=1), joint[:, n >> 1:].sum(axis=1)], axis=1)
    total = post.sum(axis=1, keepdims=True)
    if np.any(~(total > 0)):
        t = int(np.argmin(total[:, 0]))
        raise NumericalError(f"posterior accumulation vanished at t={t}")
    return post / total


def run(values):
    alpha = forward(values)
    beta = backward(values)
    return alpha, beta, posteriors(alpha, beta)
