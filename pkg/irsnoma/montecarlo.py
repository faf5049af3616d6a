"""Monte Carlo outage estimation.

Trials are split into fixed ``BATCH_SIZE`` batches; batch ``i`` always draws
from sub-stream ``i`` of the caller's ``RngStream`` and batch results are
summed in batch order, so estimates never depend on the worker count.
Sweeps evaluate every SNR point on the same channel draws.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from irsnoma.analytic import NomaConfig, noma_thresholds, oma_target_sinr
from irsnoma.channel import ScenarioParams, draw_realization, draw_unordered_gains, order_gains, user_gains
from irsnoma.choices import Scheme
from irsnoma.exceptions import InvalidParameter, LengthMismatch
from irsnoma.fading import FadingParam, RngStream, sample_nakagami_magnitude

logger = logging.getLogger(__name__)

BATCH_SIZE = 50_000
MIN_FAILURES = 20
CONFIDENCE_LEVEL = 0.95


@dataclass(frozen=True)
class OutageEstimate:
    p_hat: float
    trials: int
    failures: int
    ci_low: float
    ci_high: float
    user_index: int
    rho_db: float

    @classmethod
    def from_counts(cls, failures: int, trials: int, user_index: int, rho_db: float) -> 'OutageEstimate':
        failures, trials = int(failures), int(trials)
        p_hat = failures / trials
        interval = stats.binomtest(failures, trials).proportion_ci(
            confidence_level=CONFIDENCE_LEVEL, method='wilson'
        )
        return cls(
            p_hat=p_hat,
            trials=trials,
            failures=failures,
            ci_low=max(0.0, min(float(interval.low), p_hat)),
            ci_high=min(1.0, max(float(interval.high), p_hat)),
            user_index=user_index,
            rho_db=rho_db,
        )

    @property
    def insufficient_failures(self) -> bool:
        return self.failures < MIN_FAILURES

    @property
    def status(self) -> str:
        return 'insufficient-failures' if self.insufficient_failures else 'ok'


@dataclass(frozen=True)
class FdrParams:
    """Full-duplex decode-and-forward relay baseline.

    The relay transmits with ``power_split * rho`` and the BS with the rest.
    Residual self-interference is an independent Nakagami channel ``m_SI``
    scaled by the relay's transmit power; ``self_interference=False`` removes it.
    """
    power_split: float = 0.5
    m_SI: FadingParam = field(default_factory=lambda: FadingParam(1.0, 0.01))
    m_BR: FadingParam = field(default_factory=lambda: FadingParam(2.0))
    m_RU: FadingParam = field(default_factory=lambda: FadingParam(1.0))
    self_interference: bool = True

    def __post_init__(self):
        if not 0 < self.power_split < 1:
            raise InvalidParameter(f"Relay power split must be in (0, 1), got {self.power_split}")


def to_db(rho: float) -> float:
    return 10.0 * math.log10(rho)


def from_db(rho_db: float) -> float:
    return 10.0 ** (rho_db / 10.0)


def outage_events(gains, thresholds):
    """Boolean outage mask: ``gains**2 < thresholds``, broadcast per user."""
    return np.asarray(gains) ** 2 < np.asarray(thresholds)


def _check_inputs(params: ScenarioParams, noma: NomaConfig, rhos: Sequence[float], trials: int):
    if trials < 1:
        raise InvalidParameter(f"trials must be >= 1, got {trials}")
    if noma.N != params.N:
        raise LengthMismatch(f"NOMA config has {noma.N} users, scenario has N={params.N}")
    if not len(rhos) or any(not rho > 0 for rho in rhos):
        raise InvalidParameter(f"Transmit SNRs must be > 0, got {list(rhos)}")


def _batches(trials: int):
    for index, start in enumerate(range(0, trials, BATCH_SIZE)):
        yield index, min(BATCH_SIZE, trials - start)


def _reduce_batches(stream: RngStream, trials: int, workers: int, batch_fn: Callable):
    def run(batch):
        index, size = batch
        logger.debug("Batch %d (%d trials) on stream %s", index, size, stream)
        return batch_fn(stream.generator(index), size)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        results = list(executor.map(run, _batches(trials)))
    return sum(results[1:], start=results[0])


def _thresholds(params: ScenarioParams, noma: NomaConfig, scheme: str, rho: float):
    if scheme == Scheme.NOMA:
        return np.asarray(noma_thresholds(noma.alphas, noma.rates, rho).rho_tilde_max)
    if scheme == Scheme.OMA:
        return np.full(params.N, oma_target_sinr(noma.rates, params.N) / rho)
    raise InvalidParameter(f"Scheme {scheme} is not an IRS scheme")


def _to_estimates(counts, trials: int, rhos: Sequence[float], label: str):
    sweep = []
    for rho, row in zip(rhos, counts):
        estimates = [
            OutageEstimate.from_counts(failures, trials, n + 1, to_db(rho))
            for n, failures in enumerate(row)
        ]
        for estimate in estimates:
            if estimate.insufficient_failures:
                logger.warning(
                    "%s U%d at %.1f dB: only %d failures in %d trials",
                    label, estimate.user_index, estimate.rho_db, estimate.failures, trials,
                )
        sweep.append(estimates)
    return sweep


def estimate_outage_sweep(params: ScenarioParams, noma: NomaConfig, scheme: str, rhos: Sequence[float],
                          trials: int, stream: RngStream, workers: int = 1, fast_path: bool = False,
                          thresholds=None):
    """Outage estimates for every SNR in ``rhos``, all on one set of channel draws.

    NOMA compares the ordered gains with each user's largest SIC threshold,
    OMA compares each user's own gain with the common OMA threshold.
    ``thresholds`` overrides the computed ``(len(rhos), N)`` threshold matrix.
    """
    _check_inputs(params, noma, rhos, trials)
    if thresholds is None:
        thresholds = np.stack([_thresholds(params, noma, scheme, rho) for rho in rhos])
    thresholds = np.broadcast_to(np.asarray(thresholds, dtype=float), (len(rhos), params.N))

    def count(rng, size):
        gains = draw_unordered_gains(params, rng, size, fast_path)
        if scheme == Scheme.NOMA:
            gains, _ = order_gains(gains)
        return outage_events(gains[np.newaxis], thresholds[:, np.newaxis, :]).sum(axis=1)

    logger.info("Estimating %s outage: %s, %d SNR points, %d trials", scheme, params, len(rhos), trials)
    counts = _reduce_batches(stream, trials, workers, count)
    return _to_estimates(counts, trials, rhos, scheme)


def estimate_outage(params: ScenarioParams, noma: NomaConfig, scheme: str, rho: float, trials: int,
                    stream: RngStream, workers: int = 1, fast_path: bool = False, thresholds=None):
    if thresholds is not None:
        thresholds = [thresholds]
    return estimate_outage_sweep(
        params, noma, scheme, [rho], trials, stream, workers, fast_path, thresholds
    )[0]


def gain_ratio(params: ScenarioParams, trials: int, stream: RngStream, workers: int = 1) -> float:
    """Mean discrete-phase gain over mean continuous-phase gain on the same draws."""
    if trials < 1:
        raise InvalidParameter(f"trials must be >= 1, got {trials}")
    if params.is_continuous:
        return 1.0

    def sums(rng, size):
        realization = draw_realization(params, rng, size)
        discrete = user_gains(realization, params, params.codebook)
        continuous = user_gains(realization, params, None)
        return np.array([discrete.sum(), continuous.sum()])

    discrete_total, continuous_total = _reduce_batches(stream, trials, workers, sums)
    return float(discrete_total / continuous_total)


def fdr_outage_events(x, y, z, noma: NomaConfig, rho: float, power_split: float):
    """Per-hop outage masks of the FDR baseline.

    ``x`` is |h_BR|^2 and ``y`` the residual self-interference gain, both
    ``(trials, 1)``; ``z`` is |h_RU|^2 per user, ``(trials, N)``. User n needs
    messages 1..n at the relay and at its own receiver. Returns
    ``(relay_fail, ud_fail)``, each ``(trials, N)``.
    """
    alphas = np.asarray(noma.alphas)
    tails = np.cumsum(alphas[::-1])[::-1] - alphas
    gamma = 2.0 ** np.asarray(noma.rates) - 1.0
    required = np.tril(np.ones((noma.N, noma.N), dtype=bool))

    bs_power = (1.0 - power_split) * rho
    relay_power = power_split * rho
    relay_sinr = x * bs_power * alphas / (x * bs_power * tails + y * relay_power + 1.0)
    relay_fail = np.any((relay_sinr < gamma)[:, np.newaxis, :] & required, axis=-1)

    z = np.asarray(z)[..., np.newaxis]
    ud_sinr = z * relay_power * alphas / (z * relay_power * tails + 1.0)
    ud_fail = np.any((ud_sinr < gamma) & required, axis=-1)
    return relay_fail, ud_fail


def estimate_outage_fdr_sweep(params: ScenarioParams, noma: NomaConfig, fdr: FdrParams, rhos: Sequence[float],
                              trials: int, stream: RngStream, workers: int = 1):
    """FDR-NOMA outage; users keep their index-fixed power coefficients."""
    _check_inputs(params, noma, rhos, trials)
    for rho in rhos:
        noma_thresholds(noma.alphas, noma.rates, rho)

    def count(rng, size):
        x = sample_nakagami_magnitude(fdr.m_BR, rng, (size, 1)) ** 2
        y = sample_nakagami_magnitude(fdr.m_SI, rng, (size, 1)) ** 2
        z = sample_nakagami_magnitude(fdr.m_RU, rng, (size, params.N)) ** 2
        if not fdr.self_interference:
            y = np.zeros_like(y)
        rows = []
        for rho in rhos:
            relay_fail, ud_fail = fdr_outage_events(x, y, z, noma, rho, fdr.power_split)
            rows.append((relay_fail | ud_fail).sum(axis=0))
        return np.stack(rows)

    logger.info("Estimating FDR outage: N=%d, %d SNR points, %d trials", params.N, len(rhos), trials)
    counts = _reduce_batches(stream, trials, workers, count)
    return _to_estimates(counts, trials, rhos, Scheme.FDR)


def estimate_outage_fdr(params: ScenarioParams, noma: NomaConfig, fdr: FdrParams, rho: float, trials: int,
                        stream: RngStream, workers: int = 1):
    return estimate_outage_fdr_sweep(params, noma, fdr, [rho], trials, stream, workers)[0]
