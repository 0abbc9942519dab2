"""State space of a BPSK channel with finite memory.

A state is the window ``(x_t, x_{t-1}, ..., x_{t-L+1})``. Windows are encoded
as integers with -1 -> bit 0, +1 -> bit 1 and the most recent symbol as the
most significant bit. The neural classifier uses the same encoding for its
labels, so its outputs line up with trellis states by construction.
"""
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import InvalidParameterError

ALPHABET = (-1.0, 1.0)


def state_index(window):
    """Encode a symbol window (most recent first) as a state index."""
    window = np.asarray(window, dtype=np.float64).ravel()
    if window.size < 1:
        raise InvalidParameterError("window must contain at least one symbol")
    if not np.all((window == 1.0) | (window == -1.0)):
        raise InvalidParameterError("window symbols must be -1 or +1")
    index = 0
    for x in window:
        index = (index << 1) | int(x > 0)
    return index


def state_window(index, memory):
    """Decode a state index into its symbol window (most recent first)."""
    if memory < 1:
        raise InvalidParameterError("memory must be positive")
    if not 0 <= index < 2 ** memory:
        raise InvalidParameterError(f"state index {index} out of range for memory {memory}")
    bits = (index >> np.arange(memory - 1, -1, -1)) & 1
    return 2.0 * bits - 1.0


def window_indices(inputs, memory):
    """State index at each time ``t >= memory - 1`` (0-based) of a symbol sequence."""
    bits = (np.asarray(inputs) > 0).astype(np.int64)
    T = len(bits)
    if T < memory:
        return np.zeros(0, dtype=np.int64)
    idx = np.zeros(T - memory + 1, dtype=np.int64)
    for k in range(memory):
        # symbol x_{t-k} carries weight 2^(memory-1-k)
        idx |= bits[memory - 1 - k:T - k] << (memory - 1 - k)
    return idx


@lru_cache(maxsize=None)
def _windows(memory):
    w = np.array([state_window(s, memory) for s in range(2 ** memory)])
    w.setflags(write=False)
    return w


@dataclass(frozen=True)
class Trellis:
    memory: int
    alphabet_size: int = 2
    num_states: int = field(init=False)
    transitions: tuple = field(init=False, repr=False)

    def __post_init__(self):
        if int(self.memory) != self.memory or self.memory < 1:
            raise InvalidParameterError(f"memory must be a positive integer, got {self.memory}")
        if self.alphabet_size != 2:
            raise InvalidParameterError("only BPSK (alphabet size 2) is supported")
        n = 2 ** self.memory
        half = n >> 1
        trans = []
        for prev in range(n):
            for bit in (0, 1):
                nxt = (bit * half) | (prev >> 1)
                trans.append((prev, nxt, ALPHABET[bit]))
        object.__setattr__(self, "num_states", n)
        object.__setattr__(self, "transitions", tuple(trans))

    @property
    def windows(self):
        """``(num_states, memory)`` array of decoded windows."""
        return _windows(self.memory)

    @property
    def transition_prior(self):
        return 1.0 / self.alphabet_size

    def predecessors(self, state):
        """The two states that lead into ``state``."""
        base = (state << 1) & (self.num_states - 1)
        return base, base | 1

    def successors(self, state):
        half = self.num_states >> 1
        return state >> 1, half | (state >> 1)

    def driving_symbol(self, state):
        """Symbol that drove the transition into ``state`` (its most recent entry)."""
        return ALPHABET[state >> (self.memory - 1)]

    def state_means(self, taps):
        """Noiseless outputs for every state; ``taps`` is ``(L,)`` or ``(T, L)``."""
        taps = np.asarray(taps, dtype=np.float64)
        if taps.shape[-1] != self.memory:
            raise InvalidParameterError(
                f"tap length {taps.shape[-1]} does not match trellis memory {self.memory}")
        return taps @ self.windows.T


def build_trellis(memory):
    return Trellis(int(memory))


def state_mean(state, taps, memory=None):
    """Noiseless channel output ``sum_l h_l x_{t-l+1}`` for the window of ``state``."""
    taps = np.asarray(taps, dtype=np.float64).ravel()
    if memory is not None and len(taps) != memory:
        raise InvalidParameterError(f"tap length {len(taps)} does not match memory {memory}")
    return float(taps @ state_window(int(state), len(taps)))
