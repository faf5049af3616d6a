"""Nakagami-m link sampling.

Complex coefficients are numpy ``complex128`` values: magnitude is ``np.abs``
and phase is ``wrap_phase(np.angle(c))``. Every array-returning sampler
accepts a ``size`` so a whole batch of trials is drawn in one call.
"""
from dataclasses import dataclass

import numpy as np

from irsnoma.exceptions import InvalidParameter

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class FadingParam:
    m: float
    omega: float = 1.0

    def __post_init__(self):
        if not self.m >= 0.5:
            raise InvalidParameter(f"Nakagami shape m must be >= 0.5, got {self.m}")
        if not self.omega > 0:
            raise InvalidParameter(f"Nakagami spread omega must be > 0, got {self.omega}")


@dataclass(frozen=True)
class RngStream:
    """A reproducible random stream identified by ``(seed, stream_id)``.

    Sub-streams (one per Monte Carlo batch) extend the spawn key, so two
    streams never share state and a stream never depends on how many others
    were created before it.
    """
    seed: int
    stream_id: int = 0

    def generator(self, *substream: int) -> np.random.Generator:
        sequence = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, *substream))
        return np.random.Generator(np.random.PCG64(sequence))


def wrap_phase(phase):
    wrapped = np.mod(phase, TWO_PI)
    # np.mod of a tiny negative number rounds up to exactly 2pi
    return np.where(wrapped >= TWO_PI, 0.0, wrapped)


def sample_nakagami_magnitude(param: FadingParam, rng: np.random.Generator, size=None):
    # |X|^2 ~ Gamma(shape=m, scale=omega/m)
    return np.sqrt(rng.gamma(param.m, param.omega / param.m, size))


def sample_complex(param: FadingParam, rng: np.random.Generator, size=None):
    magnitude = sample_nakagami_magnitude(param, rng, size)
    phase = rng.uniform(0.0, TWO_PI, size)
    return magnitude * np.exp(1j * phase)
