"""Equivalent channel gains of the N IRS-assisted users.

Each user n is served by its own IRS; no cross-IRS terms are ever formed.
Array layout: ``G`` and ``g`` are ``(..., N, K)``, ``h`` is ``(..., N)``,
gains are ``(..., N)`` with the leading axes being Monte Carlo trials.
"""
import logging
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from irsnoma.choices import Scenario
from irsnoma.exceptions import InvalidParameter, LengthMismatch
from irsnoma.fading import FadingParam, sample_complex, sample_nakagami_magnitude
from irsnoma.phase import IrsSetting, PhaseCodebook, codebook_for, optimal_phases_s1, optimal_phases_s2

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ScenarioParams:
    scenario: str = Scenario.NO_DIRECT_LINK
    N: int = 2
    K: int = 2
    b: Optional[int] = 3
    beta: float = 0.9
    m_G: float = 2.0
    m_g: float = 1.0
    m_h: float = 1.0
    omega_G: float = 1.0
    omega_g: float = 1.0
    omega_h: float = 1.0

    def __post_init__(self):
        if self.scenario not in Scenario.values:
            raise InvalidParameter(f"Unknown scenario: {self.scenario}")
        if self.N < 1:
            raise InvalidParameter(f"N must be >= 1, got {self.N}")
        if self.K < 1:
            raise InvalidParameter(f"K must be >= 1, got {self.K}")
        if not 0 < self.beta <= 1:
            raise InvalidParameter(f"beta must be in (0, 1], got {self.beta}")
        # the constructors reject b < 1 and invalid fading parameters
        codebook_for(self.b)
        FadingParam(self.m_G, self.omega_G)
        FadingParam(self.m_g, self.omega_g)
        FadingParam(self.m_h, self.omega_h)

    @property
    def has_direct_link(self) -> bool:
        return self.scenario == Scenario.WITH_DIRECT_LINK

    @property
    def is_continuous(self) -> bool:
        return self.b is None

    @property
    def codebook(self) -> Optional[PhaseCodebook]:
        return codebook_for(self.b)

    @property
    def fading_G(self) -> FadingParam:
        return FadingParam(self.m_G, self.omega_G)

    @property
    def fading_g(self) -> FadingParam:
        return FadingParam(self.m_g, self.omega_g)

    @property
    def fading_h(self) -> FadingParam:
        return FadingParam(self.m_h, self.omega_h)

    def with_changes(self, **changes) -> 'ScenarioParams':
        return replace(self, **changes)


@dataclass(frozen=True)
class ChannelRealization:
    G: np.ndarray
    g: np.ndarray
    h: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.G.shape != self.g.shape:
            raise LengthMismatch(f"G and g differ in shape: {self.G.shape} vs {self.g.shape}")


@dataclass(frozen=True)
class GainVector:
    gains: np.ndarray
    permutation: np.ndarray


def draw_realization(params: ScenarioParams, rng: np.random.Generator, trials: Optional[int] = None):
    shape = (params.N, params.K) if trials is None else (trials, params.N, params.K)
    G = sample_complex(params.fading_G, rng, shape)
    g = sample_complex(params.fading_g, rng, shape)
    h = sample_complex(params.fading_h, rng, shape[:-1]) if params.has_direct_link else None
    return ChannelRealization(G=G, g=g, h=h)


def _reflected_sum(G, g, setting: IrsSetting):
    G = np.asarray(G)
    g = np.asarray(g)
    if G.shape != g.shape or G.shape[-1] != setting.K:
        raise LengthMismatch(
            f"Element counts differ: G {G.shape}, g {g.shape}, phases {np.shape(setting.phases)}"
        )
    return setting.beta * np.sum(G * g * np.exp(1j * setting.phases), axis=-1)


def equivalent_gain_s1(G, g, setting: IrsSetting):
    return np.abs(_reflected_sum(G, g, setting))


def equivalent_gain_s2(h, G, g, setting: IrsSetting):
    return np.abs(np.asarray(h) + _reflected_sum(G, g, setting))


def user_gains(realization: ChannelRealization, params: ScenarioParams, codebook: Optional[PhaseCodebook]):
    """Gains of every user after applying that user's optimal phases."""
    G, g = realization.G, realization.g
    if params.has_direct_link:
        phases = optimal_phases_s2(realization.h, G, g, codebook)
        return equivalent_gain_s2(realization.h, G, g, IrsSetting(params.beta, phases, codebook))
    phases = optimal_phases_s1(G, g, codebook)
    return equivalent_gain_s1(G, g, IrsSetting(params.beta, phases, codebook))


def _fast_path_gains(params: ScenarioParams, rng: np.random.Generator, trials: int):
    # per-element residual errors drawn directly, uniform on [-delta/2, delta/2)
    shape = (trials, params.N, params.K)
    cascade = (sample_nakagami_magnitude(params.fading_G, rng, shape)
               * sample_nakagami_magnitude(params.fading_g, rng, shape))
    codebook = params.codebook
    if codebook is None:
        reflected = params.beta * np.sum(cascade, axis=-1).astype(complex)
    else:
        error = rng.uniform(-codebook.delta / 2, codebook.delta / 2, shape)
        reflected = params.beta * np.sum(cascade * np.exp(1j * error), axis=-1)
    if params.has_direct_link:
        reflected = reflected + sample_nakagami_magnitude(params.fading_h, rng, shape[:-1])
    return np.abs(reflected)


def draw_unordered_gains(params: ScenarioParams, rng: np.random.Generator, trials: int, fast_path: bool = False):
    """``(trials, N)`` gains, column n belonging to user n's own channel draw."""
    if fast_path:
        return _fast_path_gains(params, rng, trials)
    return user_gains(draw_realization(params, rng, trials), params, params.codebook)


def order_gains(gains: np.ndarray):
    """Sort ascending along the user axis; ties keep the lower original index first."""
    permutation = np.argsort(gains, axis=-1, kind='stable')
    return np.take_along_axis(gains, permutation, axis=-1), permutation


def draw_ordered_gains(params: ScenarioParams, rng: np.random.Generator) -> GainVector:
    unordered = draw_unordered_gains(params, rng, 1)[0]
    gains, permutation = order_gains(unordered)
    return GainVector(gains=gains, permutation=permutation)
