"""Discrete phase-shift codebooks and per-element phase alignment.

A codebook of ``b`` bits holds ``L = 2**b`` levels ``(2i+1)*delta/2`` with
``delta = 2*pi/L``. Continuous phases are represented by ``codebook=None``.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from irsnoma.exceptions import InvalidParameter, LengthMismatch
from irsnoma.fading import TWO_PI, wrap_phase


@dataclass(frozen=True)
class PhaseCodebook:
    b: int

    def __post_init__(self):
        if int(self.b) != self.b or self.b < 1:
            raise InvalidParameter(f"Resolution bits must be an integer >= 1, got {self.b}")

    @property
    def L(self) -> int:
        return 2 ** self.b

    @property
    def delta(self) -> float:
        return TWO_PI / self.L

    @property
    def levels(self) -> np.ndarray:
        return (2 * np.arange(self.L) + 1) * self.delta / 2


@dataclass(frozen=True)
class IrsSetting:
    beta: float
    phases: np.ndarray
    codebook: Optional[PhaseCodebook] = None

    def __post_init__(self):
        if not 0 < self.beta <= 1:
            raise InvalidParameter(f"Reflection amplitude beta must be in (0, 1], got {self.beta}")

    @property
    def K(self) -> int:
        return np.shape(self.phases)[-1]

    @property
    def is_continuous(self) -> bool:
        return self.codebook is None


def codebook_for(bits: Optional[int]) -> Optional[PhaseCodebook]:
    return None if bits is None else PhaseCodebook(bits)


def quantize(target_phase, cb: PhaseCodebook):
    # half-open cells [i*delta, (i+1)*delta) map to their midpoint
    target = wrap_phase(target_phase)
    index = np.floor(target / cb.delta)
    return wrap_phase(cb.delta * (index + 0.5))


def quantization_error(target_phase, cb: PhaseCodebook):
    """Circular ``target - quantize(target)``, always in [-delta/2, delta/2).

    Rounding at cell edges can land an ulp outside the range; such values
    are clamped onto it.
    """
    target = wrap_phase(target_phase)
    error = np.mod(target - quantize(target, cb) + np.pi, TWO_PI) - np.pi
    return np.clip(error, -cb.delta / 2, np.nextafter(cb.delta / 2, 0.0))


def _check_lengths(G, g):
    if np.shape(G) != np.shape(g):
        raise LengthMismatch(f"Channel lists differ in shape: {np.shape(G)} vs {np.shape(g)}")


def _aligned(target, cb: Optional[PhaseCodebook]):
    if cb is None:
        return wrap_phase(target)
    return quantize(target, cb)


def optimal_phases_s1(G, g, cb: Optional[PhaseCodebook], theta_tilde: float = 0.0):
    """Per-element phases that steer every cascaded term toward ``theta_tilde``.

    Works element-wise on the last axis, so batches of shape ``(..., K)`` are
    handled in one call.
    """
    _check_lengths(G, g)
    return _aligned(theta_tilde - np.angle(np.asarray(G) * np.asarray(g)), cb)


def optimal_phases_s2(h, G, g, cb: Optional[PhaseCodebook]):
    _check_lengths(G, g)
    h_phase = np.angle(np.asarray(h))[..., np.newaxis]
    return _aligned(h_phase - np.angle(np.asarray(G) * np.asarray(g)), cb)
