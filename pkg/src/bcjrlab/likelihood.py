"""Model-based Gaussian likelihood tables built from channel tap estimates."""
import logging
from dataclasses import dataclass

import numpy as np

from .channel import TapProfile
from .errors import ContractViolation, InvalidParameterError
from .trellis import Trellis

log = logging.getLogger(__name__)

_LOG_2PI = np.log(2.0 * np.pi)

# Rows that underflowed to all zeros and were replaced by a uniform row.
diagnostics = {"underflow_rows": 0}


def gaussian_likelihood(y, mean, sigma2):
    """Gaussian density of ``y`` around ``mean``; broadcasts over arrays.

    The exponent is formed first and exponentiated once, so far tails flush
    to zero instead of overflowing.
    """
    if not np.all(np.asarray(sigma2) > 0):
        raise InvalidParameterError(f"sigma2 must be > 0, got {sigma2}")
    d = np.asarray(y, dtype=np.float64) - np.asarray(mean, dtype=np.float64)
    out = np.exp(-0.5 * (_LOG_2PI + np.log(sigma2)) - d * d / (2.0 * sigma2))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class LikelihoodTable:
    """``values[t, s] = p(y_t | s_t = s)`` for a frame."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] < 1:
            raise InvalidParameterError(f"likelihood table must be (T, S) with T >= 1, got {v.shape}")
        object.__setattr__(self, "values", v)

    @property
    def length(self):
        return self.values.shape[0]

    @property
    def num_states(self):
        return self.values.shape[1]


def sanitize_rows(values):
    """Replace all-zero rows by uniform rows, counting them in ``diagnostics``."""
    if not np.all(np.isfinite(values)) or np.any(values < 0):
        raise InvalidParameterError("likelihoods must be finite and nonnegative")
    dead = ~np.any(values > 0, axis=1)
    n = int(dead.sum())
    if n:
        diagnostics["underflow_rows"] += n
        log.warning("%d likelihood rows underflowed; replaced by uniform rows", n)
        values = values.copy()
        values[dead] = 1.0
    return values


@dataclass(frozen=True)
class CsiLikelihoodProvider:
    estimated_taps: TapProfile
    noise_variance: float
    trellis: Trellis

    def __post_init__(self):
        if self.estimated_taps.memory != self.trellis.memory:
            raise ContractViolation(
                f"estimated taps have memory {self.estimated_taps.memory}, "
                f"trellis has {self.trellis.memory}")
        if not self.noise_variance > 0:
            raise InvalidParameterError("noise_variance must be > 0")


def build_table(outputs, provider):
    """Likelihood of every received sample under every trellis state.

    Row ``t`` uses the estimated taps in force at time ``t``.
    """
    y = np.asarray(outputs, dtype=np.float64)
    if y.ndim != 1 or len(y) < 1:
        raise InvalidParameterError("outputs must be a non-empty vector")
    taps = provider.estimated_taps.rows(len(y))
    means = provider.trellis.state_means(taps)
    values = gaussian_likelihood(y[:, None], means, provider.noise_variance)
    return LikelihoodTable(sanitize_rows(np.atleast_2d(values)))
