"""Softmax state classifier: a three-layer perceptron trained with Adam.

Layer widths are 1 -> 100 -> 50 -> num_states with sigmoid, ReLU and softmax
activations. Gradients are derived by hand; the test suite checks them
against central finite differences.
"""
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, NumericalError

HIDDEN = (100, 50)
PARAM_NAMES = ("w1", "b1", "w2", "b2", "w3", "b3")


@dataclass
class MlpParams:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    w3: np.ndarray
    b3: np.ndarray

    @property
    def num_states(self):
        return self.w3.shape[1]

    def arrays(self):
        return [getattr(self, k) for k in PARAM_NAMES]

    def copy(self):
        return MlpParams(*(a.copy() for a in self.arrays()))

    def validate(self):
        shapes = [a.shape for a in self.arrays()]
        h1, h2 = self.w2.shape
        expected = [(1, h1), (h1,), (h1, h2), (h2,), (h2, self.num_states), (self.num_states,)]
        if shapes != expected:
            raise InvalidParameterError(f"inconsistent layer shapes {shapes}")
        if not all(np.all(np.isfinite(a)) for a in self.arrays()):
            raise NumericalError("non-finite MLP weights")
        return self


def init_params(num_states, rng, hidden=HIDDEN):
    """Glorot-uniform weights and zero biases."""
    widths = (1,) + tuple(hidden) + (num_states,)
    arrays = []
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        arrays.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        arrays.append(np.zeros(fan_out))
    return MlpParams(*arrays)


def zero_params(num_states, hidden=HIDDEN):
    widths = (1,) + tuple(hidden) + (num_states,)
    arrays = []
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        arrays += [np.zeros((fan_in, fan_out)), np.zeros(fan_out)]
    return MlpParams(*arrays)


def _sigmoid(z):
    # split by sign so neither branch overflows
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _forward(params, y):
    x = np.asarray(y, dtype=np.float64).reshape(-1, 1)
    if not np.all(np.isfinite(x)):
        raise NumericalError("non-finite network input")
    z1 = x @ params.w1 + params.b1
    h1 = _sigmoid(z1)
    z2 = h1 @ params.w2 + params.b2
    h2 = np.maximum(z2, 0.0)
    logits = h2 @ params.w3 + params.b3
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    probs = e / e.sum(axis=1, keepdims=True)
    if not np.all(np.isfinite(probs)):
        bad = int(np.argmax(~np.all(np.isfinite(probs), axis=1)))
        raise NumericalError(f"non-finite softmax output for input {x[bad, 0]!r} "
                             f"(max |logit| = {np.abs(logits[bad]).max()})")
    return x, h1, z2, h2, shifted, probs


def predict_proba(params, y):
    """Softmax posteriors over states, one row per input sample."""
    return _forward(params, y)[-1]


def mlp_forward(params, y):
    """Posterior probability vector over states for a single received sample."""
    return predict_proba(params, np.array([y]))[0]


def cross_entropy(params, y, labels):
    """Mean negative log posterior of the true labels."""
    _, _, _, _, shifted, _ = _forward(params, y)
    labels = np.asarray(labels)
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    return float(-log_probs[np.arange(len(labels)), labels].mean())


def loss_and_grads(params, y, labels):
    """Mean cross-entropy and its gradient with respect to every parameter."""
    x, h1, z2, h2, shifted, probs = _forward(params, y)
    labels = np.asarray(labels)
    n = len(labels)
    rows = np.arange(n)
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    loss = float(-log_probs[rows, labels].mean())

    d_logits = probs.copy()
    d_logits[rows, labels] -= 1.0
    d_logits /= n
    g_w3 = h2.T @ d_logits
    g_b3 = d_logits.sum(axis=0)
    d_h2 = d_logits @ params.w3.T
    d_z2 = d_h2 * (z2 > 0)
    g_w2 = h1.T @ d_z2
    g_b2 = d_z2.sum(axis=0)
    d_z1 = (d_z2 @ params.w2.T) * h1 * (1.0 - h1)
    g_w1 = x.T @ d_z1
    g_b1 = d_z1.sum(axis=0)
    return loss, MlpParams(g_w1, g_b1, g_w2, g_b2, g_w3, g_b3)


def input_gradient(params, y):
    """Jacobian ``d p(s | y) / d y`` of the softmax output for a scalar input."""
    x, h1, z2, h2, _, probs = _forward(params, np.array([y]))
    p = probs[0]
    d_z1 = params.w1[0] * h1[0] * (1.0 - h1[0])
    d_z2 = d_z1 @ params.w2
    d_logits = (d_z2 * (z2[0] > 0)) @ params.w3
    return p * (d_logits - p @ d_logits)


class Adam:
    def __init__(self, params, learning_rate=0.01, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step_count = 0
        self.m = [np.zeros_like(a) for a in params.arrays()]
        self.v = [np.zeros_like(a) for a in params.arrays()]

    def step(self, params, grads):
        self.step_count += 1
        c1 = 1.0 - self.beta1 ** self.step_count
        c2 = 1.0 - self.beta2 ** self.step_count
        for p, g, m, v in zip(params.arrays(), grads.arrays(), self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def train_mlp(ys, labels, num_states, rng, epochs=100, learning_rate=0.01, batch_size=128,
              params=None):
    """Fit the classifier by mini-batch Adam with per-epoch reshuffling.

    Returns the trained parameters and the per-epoch mean training loss.
    """
    ys = np.asarray(ys, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if len(ys) == 0:
        raise InvalidParameterError("training set is empty")
    if len(ys) != len(labels):
        raise InvalidParameterError("inputs and labels differ in length")
    if labels.min() < 0 or labels.max() >= num_states:
        raise InvalidParameterError("labels outside the state range")
    if epochs < 1 or batch_size < 1 or not learning_rate > 0:
        raise InvalidParameterError("epochs, batch_size and learning_rate must be positive")
    params = init_params(num_states, rng) if params is None else params.copy()
    opt = Adam(params, learning_rate)
    n = len(ys)
    trace = []
    for _ in range(epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, batch_size):
            idx = order[start:start + batch_size]
            loss, grads = loss_and_grads(params, ys[idx], labels[idx])
            if not np.isfinite(loss):
                raise NumericalError(f"training diverged at epoch {len(trace) + 1} (loss={loss})")
            total += loss * len(idx)
            opt.step(params, grads)
        trace.append(total / n)
    return params, trace
