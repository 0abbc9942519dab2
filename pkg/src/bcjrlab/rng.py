"""Deterministic, splittable random streams.

Every stochastic routine in the package takes an explicit
:class:`numpy.random.Generator`. Streams for a Monte-Carlo run are derived
from ``(seed, purpose, index)`` so that results never depend on scheduling
order or thread count.
"""
import numpy as np

TRANSMIT = 0
ESTIMATE = 1
TRAINING = 2
INIT = 3
CHANNEL = 4


def stream(seed, purpose, index=0):
    """Return an independent generator for ``(seed, purpose, index)``."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(purpose), int(index)))
    return np.random.Generator(np.random.PCG64(ss))


def trial_streams(seed, trial):
    """Source/noise, transmission-channel and estimated-channel streams.

    All three depend on ``(seed, trial)`` only, so detectors and scenarios
    sharing a seed see the same symbols and noise in every trial.
    """
    return (stream(seed, TRANSMIT, trial), stream(seed, CHANNEL, trial),
            stream(seed, ESTIMATE, trial))
