"""Two-state Markov-Gaussian noise sequences.

The chain stays in its current state with intra-state probability p and
switches with probability 1-p; state 0 emits Normal(mu0, sigma0), state 1
Normal(mu1, sigma1).  With the default means +/-2 the sequence has zero
global mean but locally non-zero means whose run lengths grow with p,
which is what lets the noise break up banding edges.

Draw order is fixed so sequences are bit-reproducible: one uniform for
the initial coin flip, a block of length-1 uniforms for the transitions,
then a block of standard normals for the emissions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import CounterRng


@dataclass(frozen=True)
class MarkovParams:
    """Chain parameters; sigma values are standard deviations."""

    p: float
    mu0: float = 2.0
    sigma0: float = 1.0
    mu1: float = -2.0
    sigma1: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise ValueError(f"p must be in (0, 1), got {self.p}")
        if self.sigma0 < 0.0 or self.sigma1 < 0.0:
            raise ValueError("sigma values must be non-negative")


@dataclass
class ChainState:
    """Resumable chain position: current state plus its random stream."""

    state: int
    rng: CounterRng

    def __post_init__(self):
        if self.state not in (0, 1):
            raise ValueError(f"state must be 0 or 1, got {self.state}")


def next_state(current: int, p: float, u: float) -> int:
    """Stay in `current` when u < p, otherwise switch."""
    return current if u < p else 1 - current


def sample_state(state: int, params: MarkovParams, rng: CounterRng) -> float:
    """One Gaussian emission for the given state (exact mean at sigma 0)."""
    mu = params.mu0 if state == 0 else params.mu1
    sigma = params.sigma0 if state == 0 else params.sigma1
    return float(mu + sigma * rng.normals(1)[0])


def generate_chain(
    params: MarkovParams, length: int, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Generate (values, states) for a seeded chain of the given length.

    The initial state is a fair coin flip from the seeded stream.  The
    state sequence is computed as the running parity of switch events,
    which matches stepping next_state over the same uniforms.
    """
    if length < 1:
        raise ValueError(f"length must be >= 1, got {length}")
    rng = CounterRng(seed)
    first = 0 if rng.uniforms(1)[0] < 0.5 else 1
    states = np.empty(length, dtype=np.uint8)
    states[0] = first
    if length > 1:
        switches = rng.uniforms(length - 1) >= params.p
        states[1:] = (first + np.cumsum(switches)) & 1
    z = rng.normals(length)
    values = np.where(
        states == 0, params.mu0 + params.sigma0 * z, params.mu1 + params.sigma1 * z
    )
    return values, states


def generate_sequence(params: MarkovParams, length: int, seed: int) -> np.ndarray:
    """Values-only view of generate_chain."""
    return generate_chain(params, length, seed)[0]
