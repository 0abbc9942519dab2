"""Learned channel likelihoods: classifier posterior times mixture marginal.

With a uniform state prior, Bayes' rule turns the classifier's ``p(s | y)``
and the mixture estimate of ``p(y)`` into ``p(y | s) = p(s | y) p(y) * |S|``.
"""
import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from . import mlp as _mlp
from .errors import ContractViolation, InvalidParameterError
from .gmm import GmmModel, fit_gmm, gmm_density
from .likelihood import LikelihoodTable, sanitize_rows
from .trellis import Trellis, window_indices

FORMAT_VERSION = 1


@dataclass(frozen=True)
class TrainingSet:
    """Received samples paired with the state index of their symbol window.

    Samples whose window reaches before the first symbol are dropped.
    """

    outputs: np.ndarray
    labels: np.ndarray

    @classmethod
    def from_frame(cls, inputs, outputs, memory):
        labels = window_indices(inputs, memory)
        return cls(np.asarray(outputs, dtype=np.float64)[memory - 1:], labels)

    def __len__(self):
        return len(self.labels)


@dataclass
class NeuralLikelihoodProvider:
    mlp: _mlp.MlpParams
    gmm: GmmModel
    trellis: Trellis
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.mlp.num_states != self.trellis.num_states:
            raise ContractViolation(
                f"classifier has {self.mlp.num_states} outputs, trellis has "
                f"{self.trellis.num_states} states")


def neural_likelihood(provider, y):
    """Learned ``p(y | s)`` for every state; a scalar ``y`` gives a vector,
    an array gives one row per sample."""
    y_arr = np.asarray(y, dtype=np.float64)
    post = _mlp.predict_proba(provider.mlp, y_arr.ravel())
    marginal = gmm_density(provider.gmm, y_arr.ravel())
    out = post * marginal[:, None] * provider.trellis.num_states
    return out[0] if y_arr.ndim == 0 else out


def build_neural_table(outputs, provider):
    y = np.asarray(outputs, dtype=np.float64)
    if y.ndim != 1 or len(y) < 1:
        raise InvalidParameterError("outputs must be a non-empty vector")
    return LikelihoodTable(sanitize_rows(neural_likelihood(provider, y)))


def train_provider(data, trellis, rng, epochs=100, learning_rate=0.01, batch_size=128,
                   gmm_components=None, gmm_seed=0):
    """Train the classifier and fit the marginal density on one training set.

    Returns the provider; the classifier's per-epoch loss trace is kept in
    ``provider.meta["loss_trace"]``.
    """
    if len(data) == 0:
        raise InvalidParameterError("training set is empty")
    params, trace = _mlp.train_mlp(data.outputs, data.labels, trellis.num_states, rng,
                                   epochs=epochs, learning_rate=learning_rate,
                                   batch_size=batch_size)
    k = trellis.num_states if gmm_components is None else int(gmm_components)
    gmm = fit_gmm(data.outputs, k, seed=gmm_seed)
    return NeuralLikelihoodProvider(params, gmm, trellis, {"loss_trace": trace})


def fingerprint(obj):
    """Stable short hash of a JSON-serializable object."""
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def save_provider(path, provider, **meta):
    """Write a provider to a versioned ``.npz`` archive."""
    info = dict(provider.meta)
    info.update(meta)
    info.update({
        "format_version": FORMAT_VERSION,
        "memory": provider.trellis.memory,
        "layer_shapes": [list(a.shape) for a in provider.mlp.arrays()],
        "gmm_components": provider.gmm.num_components,
        "gmm_variance_floor": provider.gmm.variance_floor,
    })
    arrays = {k: a for k, a in zip(_mlp.PARAM_NAMES, provider.mlp.arrays())}
    arrays.update(gmm_weights=provider.gmm.weights, gmm_means=provider.gmm.means,
                  gmm_variances=provider.gmm.variances)
    with open(path, "wb") as fh:
        np.savez(fh, meta=np.array(json.dumps(info, sort_keys=True)), **arrays)


def load_provider(path):
    with np.load(path, allow_pickle=False) as z:
        meta = json.loads(str(z["meta"]))
        if meta.get("format_version") != FORMAT_VERSION:
            raise InvalidParameterError(
                f"{path}: unsupported provider format {meta.get('format_version')!r}")
        params = _mlp.MlpParams(*(z[k].copy() for k in _mlp.PARAM_NAMES)).validate()
        if [list(a.shape) for a in params.arrays()] != meta["layer_shapes"]:
            raise InvalidParameterError(f"{path}: layer shapes do not match the header")
        gmm = GmmModel(z["gmm_weights"], z["gmm_means"], z["gmm_variances"],
                       meta["gmm_variance_floor"])
    return NeuralLikelihoodProvider(params, gmm, Trellis(meta["memory"]), meta)
