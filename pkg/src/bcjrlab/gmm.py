"""One-dimensional Gaussian mixture density fitted by expectation-maximization."""
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError, NumericalError
from .likelihood import gaussian_likelihood

VARIANCE_FLOOR = 1e-6
_LOG_2PI = np.log(2.0 * np.pi)


@dataclass
class GmmModel:
    weights: np.ndarray
    means: np.ndarray
    variances: np.ndarray
    variance_floor: float = VARIANCE_FLOOR
    log_likelihood_trace: list = field(default_factory=list, repr=False)
    reseeded: bool = False

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.means = np.asarray(self.means, dtype=np.float64)
        self.variances = np.asarray(self.variances, dtype=np.float64)
        if not (self.weights.shape == self.means.shape == self.variances.shape) or self.weights.ndim != 1:
            raise InvalidParameterError("weights, means and variances must be equal-length vectors")
        if abs(self.weights.sum() - 1.0) > 1e-9 or np.any(self.weights < 0):
            raise InvalidParameterError("mixture weights must lie on the simplex")
        if np.any(self.variances < self.variance_floor):
            raise InvalidParameterError("component variance below the floor")

    @property
    def num_components(self):
        return len(self.weights)


def _component_log_pdf(y, means, variances):
    d = y[:, None] - means[None, :]
    return -0.5 * (_LOG_2PI + np.log(variances)) - d * d / (2.0 * variances)


def _logsumexp(a):
    m = a.max(axis=1, keepdims=True)
    return (m + np.log(np.exp(a - m).sum(axis=1, keepdims=True)))[:, 0]


def gmm_density(model, y):
    """Mixture density at ``y`` (scalar or array)."""
    y = np.asarray(y, dtype=np.float64)
    comp = gaussian_likelihood(y.reshape(-1, 1), model.means, model.variances)
    out = comp @ model.weights
    return float(out[0]) if y.ndim == 0 else out.reshape(y.shape)


def average_log_likelihood(model, samples):
    samples = np.asarray(samples, dtype=np.float64)
    lp = _component_log_pdf(samples, model.means, model.variances) + np.log(model.weights)
    return float(_logsumexp(lp).mean())


def kmeans_1d(samples, k, rng, iterations=10):
    """k-means++ seeding followed by Lloyd iterations; returns centers and labels."""
    centers = np.empty(k)
    centers[0] = samples[rng.integers(len(samples))]
    d2 = (samples - centers[0]) ** 2
    for j in range(1, k):
        total = d2.sum()
        if total > 0:
            centers[j] = samples[rng.choice(len(samples), p=d2 / total)]
        else:
            centers[j] = samples[rng.integers(len(samples))]
        d2 = np.minimum(d2, (samples - centers[j]) ** 2)
    for _ in range(iterations):
        labels = np.argmin(np.abs(samples[:, None] - centers[None, :]), axis=1)
        for j in range(k):
            members = samples[labels == j]
            if len(members):
                centers[j] = members.mean()
    labels = np.argmin(np.abs(samples[:, None] - centers[None, :]), axis=1)
    return centers, labels


def _initial_model(samples, k, rng, floor):
    centers, labels = kmeans_1d(samples, k, rng)
    counts = np.bincount(labels, minlength=k).astype(np.float64)
    fallback = max(samples.var() / k, floor)
    variances = np.full(k, fallback)
    for j in range(k):
        if counts[j] > 1:
            variances[j] = max(samples[labels == j].var(), floor)
    counts = np.maximum(counts, 1.0)
    return centers, variances, counts / counts.sum()


def fit_gmm(samples, k, seed=0, tol=1e-6, max_iter=200, variance_floor=VARIANCE_FLOOR):
    """Fit a ``k``-component mixture by EM, initialised from k-means.

    Iterates until the average log-likelihood improves by less than ``tol`` or
    ``max_iter`` iterations have run. A component that loses all its
    responsibility is re-seeded once at the worst-explained sample; a second
    collapse raises :class:`NumericalError`. The returned model's
    ``log_likelihood_trace`` covers the EM run after any re-seeding.
    """
    samples = np.asarray(samples, dtype=np.float64).ravel()
    if int(k) != k or k < 1:
        raise InvalidParameterError(f"component count must be a positive integer, got {k}")
    if len(samples) < k:
        raise InvalidParameterError(f"{len(samples)} samples cannot support {k} components")
    if not np.all(np.isfinite(samples)):
        raise InvalidParameterError("samples must be finite")
    rng = np.random.default_rng(seed)
    means, variances, weights = _initial_model(samples, int(k), rng, variance_floor)
    n = len(samples)
    reseeded = False
    trace = []
    for _ in range(max_iter):
        lp = _component_log_pdf(samples, means, variances) + np.log(weights)
        norm = _logsumexp(lp)
        trace.append(float(norm.mean()))
        if len(trace) > 1 and trace[-1] - trace[-2] < tol:
            break
        resp = np.exp(lp - norm[:, None])
        nk = resp.sum(axis=0)
        dead = nk < 1e-8 * n
        if np.any(dead):
            if reseeded:
                raise NumericalError("mixture component collapsed after re-seeding")
            reseeded = True
            worst = samples[np.argsort(norm)[:int(dead.sum())]]
            means = means.copy()
            variances = variances.copy()
            means[dead] = worst
            variances[dead] = max(samples.var(), variance_floor)
            weights = np.where(dead, 1.0 / k, weights)
            weights = weights / weights.sum()
            trace = []
            continue
        weights = nk / n
        means = resp.T @ samples / nk
        d = samples[:, None] - means[None, :]
        variances = np.maximum((resp * d * d).sum(axis=0) / nk, variance_floor)
    else:
        lp = _component_log_pdf(samples, means, variances) + np.log(weights)
        trace.append(float(_logsumexp(lp).mean()))
    weights = weights / weights.sum()
    return GmmModel(weights, means, variances, variance_floor, trace, reseeded)
