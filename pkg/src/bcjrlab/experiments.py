"""Imperfect-CSI scenarios and Monte-Carlo symbol-error-rate evaluation.

Six scenarios pair a transmission channel with the estimated/training channel
the receiver works from:

====  ==========================  ===========================================
case  transmission                estimated / training
====  ==========================  ===========================================
1     exponential decay           exponential decay truncated to ``L_hat`` taps
2     exponential decay           decay constant redrawn per symbol (``delta``)
3     exponential decay           per-symbol Gaussian tap deviations
4     per-symbol tap deviations   exponential decay
5     per-symbol tap deviations   independent per-symbol tap deviations
6     per-symbol tap deviations   per-symbol tap deviations, ``L_hat`` taps
====  ==========================  ===========================================

Every profile is normalized per time index after it is generated.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import rng as rngs
from .bcjr import map_detect
from .channel import (NoiseSpec, TapProfile, bpsk_source, draw_gamma, exp_decay_rows,
                      exp_decay_taps, normalize_taps, perturb_taps, transmit)
from .errors import ConfigError, InvalidParameterError, NumericalError
from .likelihood import CsiLikelihoodProvider, build_table
from .neural import TrainingSet, build_neural_table, fingerprint, train_provider
from .trellis import Trellis

log = logging.getLogger(__name__)

CASES = (1, 2, 3, 4, 5, 6)
DETECTORS = ("conventional", "bcjrnet")
GAMMAS = (0.5, 1.0, 1.5, 2.0)
SIGMA2_GRID = (0.01, 0.05, 0.10)
DELTA_GRID = (0.15, 0.30, 0.45)
CASE6_SIGMA2 = 0.05


@dataclass(frozen=True)
class ScenarioConfig:
    case: int
    gamma: float
    L: int = 4
    L_hat: int = None
    sigma2_tap: float = None
    delta: float = None
    snr_db: float = 5.0
    T: int = 10000
    T_data: int = 10000
    num_trials: int = 20
    seed: int = 0
    epochs: int = 100
    learning_rate: float = 0.01
    batch_size: int = 128
    gmm_components: int = None
    detectors: tuple = DETECTORS

    def __post_init__(self):
        if self.case not in CASES:
            raise ConfigError(f"case must be one of {CASES}, got {self.case!r}", "case")
        if self.L_hat is None:
            object.__setattr__(self, "L_hat", self.L)
        if self.case == 6 and self.sigma2_tap is None:
            object.__setattr__(self, "sigma2_tap", CASE6_SIGMA2)
        object.__setattr__(self, "detectors", tuple(self.detectors))
        self._validate()

    def _validate(self):
        def need(ok, key, msg):
            if not ok:
                raise ConfigError(f"{key}: {msg}", key)

        need(math.isfinite(self.gamma) and self.gamma >= 0, "gamma", "must be finite and >= 0")
        need(isinstance(self.L, int) and self.L >= 1, "L", "must be a positive integer")
        need(isinstance(self.L_hat, int) and 1 <= self.L_hat <= self.L, "L_hat",
             f"must be an integer in [1, L={self.L}]")
        need(math.isfinite(self.snr_db), "snr_db", "must be finite")
        for key in ("T", "T_data", "num_trials", "epochs", "batch_size"):
            value = getattr(self, key)
            need(isinstance(value, int) and value >= 1, key, "must be a positive integer")
        need(self.T >= self.L, "T", "must be at least the channel memory L")
        need(self.T_data >= self.L_hat, "T_data", "must be at least L_hat")
        need(isinstance(self.seed, int) and self.seed >= 0, "seed", "must be a non-negative integer")
        need(self.learning_rate > 0, "learning_rate", "must be > 0")
        if self.gmm_components is not None:
            need(isinstance(self.gmm_components, int) and self.gmm_components >= 1,
                 "gmm_components", "must be a positive integer")
        need(len(self.detectors) > 0 and all(d in DETECTORS for d in self.detectors),
             "detectors", f"must be a non-empty subset of {DETECTORS}")

        uses_sigma2 = self.case in (3, 4, 5, 6)
        if uses_sigma2:
            need(self.sigma2_tap is not None, "sigma2_tap", f"required for case {self.case}")
            need(math.isfinite(self.sigma2_tap) and self.sigma2_tap >= 0, "sigma2_tap",
                 "must be finite and >= 0")
        else:
            need(self.sigma2_tap is None, "sigma2_tap", f"not applicable to case {self.case}")
        if self.case == 2:
            need(self.delta is not None, "delta", "required for case 2")
            need(0 <= self.delta < 1, "delta", "must lie in [0, 1) so the decay constant stays positive")
        else:
            need(self.delta is None, "delta", f"not applicable to case {self.case}")
        if self.case not in (1, 6):
            need(self.L_hat == self.L, "L_hat", f"case {self.case} assumes the true memory")

    @property
    def noise(self):
        return NoiseSpec(self.snr_db)

    def variant(self):
        """The swept parameter of this case (``L_hat``, ``delta`` or ``sigma2_tap``)."""
        if self.case == 1:
            return self.L_hat
        if self.case == 2:
            return self.delta
        if self.case == 6:
            return self.L_hat
        return self.sigma2_tap

    def to_dict(self):
        d = asdict(self)
        d["detectors"] = list(self.detectors)
        return d

    def training_key(self):
        """Fingerprint of everything that influences BCJRNet training."""
        keys = ("case", "gamma", "L", "L_hat", "sigma2_tap", "delta", "snr_db", "T_data",
                "seed", "epochs", "learning_rate", "batch_size", "gmm_components")
        return fingerprint({k: getattr(self, k) for k in keys})


def perfect_csi(gamma, **kw):
    """Configuration whose estimated channel equals the transmission channel."""
    L = kw.get("L", 4)
    return ScenarioConfig(case=1, gamma=gamma, L_hat=L, **kw)


@dataclass(frozen=True)
class CaseChannels:
    """Generators for one scenario's transmission and estimated channels.

    Each generator takes ``(T, rng)`` and returns a normalized profile valid
    for a frame of ``T`` symbols.
    """

    config: ScenarioConfig

    def transmission(self, T, rng):
        c = self.config
        base = exp_decay_taps(c.gamma, c.L)
        if c.case in (1, 2, 3):
            return normalize_taps(base)
        return normalize_taps(perturb_taps(base, c.sigma2_tap, T, rng))

    def estimated(self, T, rng):
        c = self.config
        if c.case in (1, 4):
            return normalize_taps(exp_decay_taps(c.gamma, c.L_hat))
        if c.case == 2:
            return normalize_taps(exp_decay_rows(draw_gamma(c.gamma, c.delta, rng, size=T), c.L))
        return normalize_taps(perturb_taps(exp_decay_taps(c.gamma, c.L_hat), c.sigma2_tap, T, rng))


def build_case(config):
    if not isinstance(config, ScenarioConfig):
        raise ConfigError("build_case expects a ScenarioConfig")
    return CaseChannels(config)


@dataclass(frozen=True)
class TrialResult:
    case_id: int
    gamma: float
    detector: str
    l_hat: int
    sigma2_tap: float
    delta: float
    snr_db: float
    symbol_errors: int
    symbols: int
    ser: float
    ci95_halfwidth: float
    seed: int
    config: dict = field(default=None, compare=False, repr=False)

    def non_overlapping(self, other):
        """True when the two 95% confidence intervals do not overlap."""
        return abs(self.ser - other.ser) > self.ci95_halfwidth + other.ci95_halfwidth


def ci95(errors, symbols):
    p = errors / symbols
    return 1.96 * math.sqrt(p * (1.0 - p) / symbols)


def ser(decisions, truth):
    """Error count, symbol count, error rate and 95% half-width."""
    decisions = np.asarray(decisions)
    truth = np.asarray(truth)
    if decisions.shape != truth.shape:
        raise InvalidParameterError(f"length mismatch: {decisions.shape} vs {truth.shape}")
    if truth.size == 0:
        raise InvalidParameterError("no symbols to compare")
    errors = int(np.count_nonzero(decisions != truth))
    n = int(truth.size)
    return errors, n, errors / n, ci95(errors, n)


def _result(config, detector, errors, symbols):
    return TrialResult(
        case_id=config.case, gamma=config.gamma, detector=detector,
        l_hat=config.L_hat if config.case in (1, 6) else None,
        sigma2_tap=config.sigma2_tap, delta=config.delta, snr_db=config.snr_db,
        symbol_errors=errors, symbols=symbols, ser=errors / symbols,
        ci95_halfwidth=ci95(errors, symbols), seed=config.seed, config=config.to_dict())


def _draw_frame(config, channels, trial):
    src, chan, est = rngs.trial_streams(config.seed, trial)
    inputs = bpsk_source(config.T, src)
    frame = transmit(inputs, channels.transmission(config.T, chan), config.noise, src)
    return frame, est


def _map_trials(fn, n, threads):
    if threads is None or threads <= 1:
        return [fn(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(n)))


def run_conventional(config, threads=1):
    """Monte-Carlo SER of the BCJR detector driven by the estimated channel taps."""
    channels = build_case(config)
    trellis = Trellis(config.L_hat)

    def trial(i):
        frame, est_rng = _draw_frame(config, channels, i)
        provider = CsiLikelihoodProvider(channels.estimated(config.T, est_rng),
                                         config.noise.noise_variance, trellis)
        decisions, _ = map_detect(build_table(frame.outputs, provider), trellis)
        return ser(decisions, frame.inputs)[0]

    errors = sum(_map_trials(trial, config.num_trials, threads))
    return _result(config, "conventional", errors, config.num_trials * config.T)


def training_set(config):
    """Labeled samples drawn through the scenario's estimated/training channel."""
    channels = build_case(config)
    rng = rngs.stream(config.seed, rngs.TRAINING, 0)
    inputs = bpsk_source(config.T_data, rng)
    profile = channels.estimated(config.T_data, rng)
    frame = transmit(inputs, profile, config.noise, rng)
    return TrainingSet.from_frame(frame.inputs, frame.outputs, config.L_hat)


def train_for(config):
    """Train the BCJRNet likelihood provider for one configuration."""
    data = training_set(config)
    provider = train_provider(
        data, Trellis(config.L_hat), rngs.stream(config.seed, rngs.INIT, 0),
        epochs=config.epochs, learning_rate=config.learning_rate,
        batch_size=config.batch_size, gmm_components=config.gmm_components,
        gmm_seed=config.seed)
    trace = provider.meta["loss_trace"]
    if not np.all(np.isfinite(trace)):
        raise NumericalError(f"training produced a non-finite loss trace for {config}")
    provider.meta.update(training_key=config.training_key(), seed=config.seed,
                         training_config={k: v for k, v in config.to_dict().items()
                                          if k not in ("detectors", "num_trials", "T")})
    log.info("trained provider %s: loss %.4f -> %.4f", config.training_key(), trace[0], trace[-1])
    return provider


def run_bcjrnet(config, provider=None, threads=1):
    """Monte-Carlo SER of BCJR driven by learned likelihoods.

    The classifier and mixture are trained once per configuration (or taken
    from ``provider``) and reused for every trial.
    """
    if provider is None:
        provider = train_for(config)
    if provider.trellis.memory != config.L_hat:
        raise ConfigError(
            f"provider memory {provider.trellis.memory} does not match L_hat={config.L_hat}", "L_hat")
    channels = build_case(config)

    def trial(i):
        frame, _ = _draw_frame(config, channels, i)
        decisions, _ = map_detect(build_neural_table(frame.outputs, provider), provider.trellis)
        return ser(decisions, frame.inputs)[0]

    errors = sum(_map_trials(trial, config.num_trials, threads))
    return _result(config, "bcjrnet", errors, config.num_trials * config.T)


def run_config(config, threads=1, provider_cache=None):
    """Run every requested detector for one configuration.

    ``provider_cache`` is an optional callable ``config -> provider`` used in
    place of training from scratch.
    """
    results = []
    for detector in config.detectors:
        if detector == "conventional":
            results.append(run_conventional(config, threads=threads))
        else:
            provider = provider_cache(config) if provider_cache else None
            results.append(run_bcjrnet(config, provider=provider, threads=threads))
    return results


def with_overrides(config, **kw):
    return replace(config, **kw)
