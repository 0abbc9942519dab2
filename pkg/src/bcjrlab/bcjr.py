"""BCJR forward-backward recursions and per-symbol MAP decisions.

Messages are rescaled to sum to one at every step instead of being carried
in the log domain; posteriors and decisions are invariant to that scaling.
Both boundaries (the state before the first symbol and the state after the
last) are taken as uniform over the trellis.

The recursions run in the compiled ``_bcjr_ext`` kernel when it is built and
fall back to the NumPy implementation otherwise. Setting the environment
variable ``BCJRLAB_PURE_PYTHON=1`` forces the fallback.
"""
import os
from dataclasses import dataclass

import numpy as np

from . import _bcjr_py
from .errors import InvalidParameterError
from .likelihood import LikelihoodTable

_kernel = _bcjr_py
BACKEND = "python"
if os.environ.get("BCJRLAB_PURE_PYTHON", "") in ("", "0"):
    try:
        from . import _bcjr_ext as _kernel  # noqa: F811
        BACKEND = "cython"
    except ImportError:
        pass

BACKENDS = {"python": _bcjr_py}
if BACKEND == "cython":
    BACKENDS["cython"] = _kernel


@dataclass(frozen=True)
class Messages:
    forward: np.ndarray
    backward: np.ndarray


@dataclass(frozen=True)
class Posteriors:
    """Row ``t`` holds ``(P(x_t = -1 | y), P(x_t = +1 | y))``."""

    per_symbol: np.ndarray


def _values(table, trellis):
    values = table.values if isinstance(table, LikelihoodTable) else np.asarray(table, dtype=np.float64)
    if values.ndim != 2 or values.shape[0] < 1:
        raise InvalidParameterError("likelihood table is empty")
    if values.shape[1] != trellis.num_states:
        raise InvalidParameterError(
            f"table has {values.shape[1]} columns, trellis has {trellis.num_states} states")
    return np.ascontiguousarray(values, dtype=np.float64)


def _kern(backend):
    if backend is None:
        return _kernel
    try:
        return BACKENDS[backend]
    except KeyError:
        raise InvalidParameterError(f"backend {backend!r} is not available") from None


def forward_pass(table, trellis, backend=None):
    return _kern(backend).forward(_values(table, trellis))


def backward_pass(table, trellis, backend=None):
    return _kern(backend).backward(_values(table, trellis))


def decide(per_symbol):
    """Hard decisions from posteriors; exact ties resolve to -1."""
    return np.where(per_symbol[:, 1] > per_symbol[:, 0], 1.0, -1.0)


def map_detect(table, trellis, backend=None, return_messages=False):
    """MAP symbol decisions and per-symbol posteriors for one frame."""
    alpha, beta, post = _kern(backend).run(_values(table, trellis))
    result = (decide(post), Posteriors(post))
    if return_messages:
        return result + (Messages(alpha, beta),)
    return result
