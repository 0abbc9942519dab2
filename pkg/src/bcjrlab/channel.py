"""Channel tap profiles, BPSK sources and the ISI/AWGN transmission model."""
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation, DegenerateChannelError, InvalidParameterError

NORM_TOL = 1e-12


@dataclass(frozen=True)
class TapProfile:
    """Channel impulse response indexed ``(t, l)``.

    A time-invariant profile holds a single row that is broadcast over time.
    """

    taps: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        taps = np.atleast_2d(np.asarray(self.taps, dtype=np.float64))
        if taps.ndim != 2 or taps.shape[1] < 1 or taps.shape[0] < 1:
            raise InvalidParameterError(f"taps must be a non-empty (T, L) matrix, got shape {taps.shape}")
        if not np.all(np.isfinite(taps)):
            raise InvalidParameterError("taps must be finite")
        if self.normalized:
            norms = np.linalg.norm(taps, axis=1)
            if np.any(np.abs(norms - 1.0) > NORM_TOL):
                raise ContractViolation("profile flagged normalized but a row norm differs from 1")
        taps.setflags(write=False)
        object.__setattr__(self, "taps", taps)

    @property
    def memory(self):
        return self.taps.shape[1]

    @property
    def time_varying(self):
        return self.taps.shape[0] > 1

    def row(self, t):
        """Taps in force at 0-based time index ``t``."""
        return self.taps[t if self.time_varying else 0]

    def rows(self, T):
        """A ``(T, L)`` view of the taps over a frame of length ``T``."""
        if self.time_varying:
            if self.taps.shape[0] < T:
                raise InvalidParameterError(
                    f"profile has {self.taps.shape[0]} rows, frame needs {T}")
            return self.taps[:T]
        return np.broadcast_to(self.taps, (T, self.memory))


@dataclass(frozen=True)
class NoiseSpec:
    snr_db: float
    noise_variance: float = field(init=False)

    def __post_init__(self):
        if not np.isfinite(self.snr_db):
            raise InvalidParameterError("snr_db must be finite")
        object.__setattr__(self, "noise_variance", 10.0 ** (-self.snr_db / 10.0))


@dataclass(frozen=True)
class Frame:
    inputs: np.ndarray
    outputs: np.ndarray
    noise_variance: float
    tap_realization: TapProfile

    @property
    def length(self):
        return len(self.inputs)


def exp_decay_taps(gamma, L):
    """Exponentially decaying profile ``exp(-gamma * (l - 1))`` for ``l = 1..L``."""
    if not np.isfinite(gamma) or gamma < 0:
        raise InvalidParameterError(f"gamma must be finite and >= 0, got {gamma}")
    if int(L) != L or L < 1:
        raise InvalidParameterError(f"L must be a positive integer, got {L}")
    return TapProfile(np.exp(-gamma * np.arange(int(L), dtype=np.float64)))


def normalize_taps(profile):
    """Scale every time-index row to unit Euclidean norm."""
    taps = profile.taps
    norms = np.linalg.norm(taps, axis=1, keepdims=True)
    if np.any(norms == 0.0):
        raise DegenerateChannelError("cannot normalize an all-zero tap row")
    return TapProfile(taps / norms, normalized=True)


def perturb_taps(base, sigma2, T, rng):
    """Add i.i.d. Gaussian(0, sigma2) deviations to every tap at every time index.

    ``base`` must be time-invariant; the result has ``T`` rows and is not normalized.
    """
    if not np.isfinite(sigma2) or sigma2 < 0:
        raise InvalidParameterError(f"sigma2 must be finite and >= 0, got {sigma2}")
    if T < 1:
        raise InvalidParameterError("T must be positive")
    if base.time_varying:
        raise InvalidParameterError("perturb_taps expects a time-invariant base profile")
    eps = rng.normal(0.0, np.sqrt(sigma2), size=(int(T), base.memory))
    return TapProfile(base.taps[0] + eps)


def draw_gamma(gamma, delta, rng, size=None):
    """Calibration-perturbed decay constant, uniform on ``[gamma(1-delta), gamma(1+delta)]``."""
    if not (0.0 <= delta < 1.0):
        raise InvalidParameterError(f"delta must lie in [0, 1), got {delta}")
    if delta == 0.0:
        return float(gamma) if size is None else np.full(size, float(gamma))
    return rng.uniform(gamma * (1.0 - delta), gamma * (1.0 + delta), size=size)


def exp_decay_rows(gammas, L):
    """Time-varying profile with row ``t`` equal to ``exp_decay_taps(gammas[t], L)``."""
    gammas = np.asarray(gammas, dtype=np.float64)
    if np.any(~np.isfinite(gammas)) or np.any(gammas < 0):
        raise InvalidParameterError("decay constants must be finite and >= 0")
    return TapProfile(np.exp(-np.outer(gammas, np.arange(L, dtype=np.float64))))


def truncate_taps(profile, L_hat):
    """Keep the first ``L_hat`` taps of every row."""
    if L_hat < 1 or L_hat > profile.memory:
        raise InvalidParameterError(f"L_hat must lie in [1, {profile.memory}], got {L_hat}")
    return TapProfile(profile.taps[:, :L_hat])


def bpsk_source(T, rng):
    """I.i.d. equiprobable symbols from {-1, +1}."""
    if T < 1:
        raise InvalidParameterError("T must be positive")
    return 2.0 * rng.integers(0, 2, size=int(T)).astype(np.float64) - 1.0


def isi_matrix(inputs, L):
    """``(T, L)`` matrix whose entry ``(t, l)`` is ``x[t - l]`` with zero padding."""
    inputs = np.asarray(inputs, dtype=np.float64)
    T = len(inputs)
    out = np.zeros((T, L))
    for l in range(L):
        out[l:, l] = inputs[:T - l]
    return out


def transmit(inputs, profile, noise, rng):
    """Pass symbols through the ISI channel and add white Gaussian noise.

    ``noise`` is a :class:`NoiseSpec` or a non-negative noise variance; a
    variance of zero gives the noiseless channel output.
    """
    variance = noise.noise_variance if isinstance(noise, NoiseSpec) else float(noise)
    if not np.isfinite(variance) or variance < 0:
        raise InvalidParameterError(f"noise variance must be >= 0, got {variance}")
    inputs = np.asarray(inputs, dtype=np.float64)
    if inputs.ndim != 1 or len(inputs) < 1:
        raise InvalidParameterError("inputs must be a non-empty vector")
    if not profile.normalized:
        raise ContractViolation("transmit requires a normalized tap profile")
    T = len(inputs)
    if profile.memory > T:
        raise InvalidParameterError(f"channel memory {profile.memory} exceeds frame length {T}")
    taps = profile.rows(T)
    clean = np.einsum("tl,tl->t", isi_matrix(inputs, profile.memory), taps)
    if variance > 0:
        clean = clean + rng.normal(0.0, np.sqrt(variance), size=T)
    return Frame(inputs=inputs, outputs=clean, noise_variance=variance,
                 tap_realization=profile)
