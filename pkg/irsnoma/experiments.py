"""Experiment runner: config ingestion, sweeps, CSV output and slope fitting.

Config files are flat ``key = value`` text read with python-dotenv; lists are
comma-separated. Results go to a CSV with the fixed ``CSV_HEADER`` columns,
written in sweep order (scheme, then sweep point, then user).
"""
import csv
import io
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from django.db import transaction
from dotenv import dotenv_values
from scipy import stats

from irsnoma.analytic import (
    NomaConfig,
    diversity_order,
    noma_thresholds,
    outage_bounds_noma,
    outage_bounds_oma,
)
from irsnoma.channel import ScenarioParams
from irsnoma.choices import ExperimentKind, Scenario, Scheme, SweepAxis
from irsnoma.exceptions import ConfigError, InsufficientData, InvalidParameter, SimulationError, UnsupportedParameters
from irsnoma.fading import FadingParam, RngStream
from irsnoma.models import COLUMNS, ExperimentRun, SweepResult
from irsnoma.montecarlo import (
    MIN_FAILURES,
    FdrParams,
    estimate_outage_fdr_sweep,
    estimate_outage_sweep,
    from_db,
    gain_ratio,
)

logger = logging.getLogger(__name__)

CSV_HEADER = COLUMNS

DEFAULT_RHO_DB = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
DEFAULT_FIXED_RHO_DB = 3.0
DEFAULT_OUTAGE_TRIALS = 10_000_000
DEFAULT_RATIO_TRIALS = 1_000_000
MIN_OUTAGE_TRIALS = 10_000
FIT_P_RANGE = (1e-5, 1e-2)

SCHEME_STREAMS = {Scheme.NOMA: 0, Scheme.OMA: 0, Scheme.FDR: 1}
RATIO_STREAM = 2

CONFIG_KEYS = {
    'experiment', 'scenario', 'N', 'K', 'b', 'beta', 'm_G', 'm_g', 'm_h', 'alphas', 'rates',
    'schemes', 'sweep', 'values', 'rho_db', 'trials', 'seed', 'out', 'fast_path',
    'fdr_power_split', 'fdr_m_SI', 'fdr_omega_SI', 'fdr_m_BR', 'fdr_m_RU', 'fit_window',
}

SCENARIO_ALIASES = {
    'i': Scenario.NO_DIRECT_LINK,
    's-i': Scenario.NO_DIRECT_LINK,
    'no_direct_link': Scenario.NO_DIRECT_LINK,
    'ii': Scenario.WITH_DIRECT_LINK,
    's-ii': Scenario.WITH_DIRECT_LINK,
    'with_direct_link': Scenario.WITH_DIRECT_LINK,
}
CONTINUOUS_WORDS = {'inf', 'none', 'continuous'}


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    params: ScenarioParams
    noma: NomaConfig
    schemes: tuple = (Scheme.NOMA,)
    sweep: str = SweepAxis.RHO_DB
    values: tuple = DEFAULT_RHO_DB
    rho_db: float = DEFAULT_FIXED_RHO_DB
    trials: int = DEFAULT_OUTAGE_TRIALS
    seed: int = 0
    out: str = 'results.csv'
    fast_path: bool = False
    fdr: FdrParams = field(default_factory=FdrParams)
    fit_window: Optional[tuple] = None
    source: str = ''

    def __post_init__(self):
        if self.kind not in ExperimentKind.values:
            raise ConfigError(f"Unknown experiment kind: {self.kind}")
        if self.sweep not in SweepAxis.values:
            raise ConfigError(f"Unknown sweep axis: {self.sweep}")
        if not self.values:
            raise ConfigError("Sweep values must not be empty")
        if any(later <= earlier for earlier, later in zip(self.values, self.values[1:])):
            raise ConfigError(f"Sweep values must be strictly increasing, got {self.values}")
        if not self.schemes or any(s not in Scheme.values for s in self.schemes):
            raise ConfigError(f"Unknown schemes: {self.schemes}")
        if self.noma.N != self.params.N:
            raise ConfigError(f"alphas/rates describe {self.noma.N} users, N={self.params.N}")
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if self.is_outage and self.trials < MIN_OUTAGE_TRIALS:
            raise ConfigError(f"Outage experiments need trials >= {MIN_OUTAGE_TRIALS}, got {self.trials}")
        if self.kind == ExperimentKind.DIVERSITY_FIT and self.sweep != SweepAxis.RHO_DB:
            raise ConfigError("diversity-fit sweeps rho_db")
        if self.kind == ExperimentKind.GAIN_RATIO and self.sweep == SweepAxis.RHO_DB:
            raise ConfigError("gain-ratio sweeps b or K")
        if self.sweep == SweepAxis.BITS and any(v != math.inf and (int(v) != v or v < 1) for v in self.values):
            raise ConfigError(f"b values must be integers >= 1 or inf, got {self.values}")
        if self.sweep == SweepAxis.ELEMENTS and any(int(v) != v or v < 1 for v in self.values):
            raise ConfigError(f"K values must be integers >= 1, got {self.values}")

    @property
    def is_outage(self) -> bool:
        return self.kind in (ExperimentKind.OUTAGE_SWEEP, ExperimentKind.DIVERSITY_FIT)

    def point_params(self, value) -> ScenarioParams:
        if self.sweep == SweepAxis.BITS:
            return self.params.with_changes(b=None if value == math.inf else int(value))
        if self.sweep == SweepAxis.ELEMENTS:
            return self.params.with_changes(K=int(value))
        return self.params


@dataclass(frozen=True)
class ResultRow:
    experiment: str
    scenario: str
    scheme: str
    user: Optional[int]
    rho_db: Optional[float]
    b: Optional[float]  # math.inf for continuous phases
    K: int
    N: int
    trials: Optional[int] = None
    failures: Optional[int] = None
    p_hat: Optional[float] = None
    ci_low: Optional[float] = None
    ci_high: Optional[float] = None
    analytic_upper: Optional[float] = None
    analytic_lower: Optional[float] = None
    diversity: Optional[float] = None


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    r_squared: float
    window: tuple
    points_used: int


@dataclass
class RunSummary:
    config: ExperimentConfig
    rows: list
    output_path: str
    notes: list = field(default_factory=list)
    fits: list = field(default_factory=list)

    @property
    def rows_written(self) -> int:
        return len(self.rows)

    def note(self, code: str, message: str):
        entry = f"{code}: {message}"
        if entry not in self.notes:
            logger.warning("%s", entry)
            self.notes.append(entry)


# Config parsing

def _scenario(text: str) -> str:
    try:
        return SCENARIO_ALIASES[text.strip().lower()]
    except KeyError:
        raise ConfigError(f"Unknown scenario: {text}") from None


def _bits(text: str):
    text = text.strip().lower()
    return math.inf if text in CONTINUOUS_WORDS else int(text)


def _list(text: str, parse=float) -> tuple:
    return tuple(parse(item.strip()) for item in text.split(',') if item.strip())


def _bool(text: str) -> bool:
    text = text.strip().lower()
    if text in ('1', 'true', 'yes', 'on'):
        return True
    if text in ('0', 'false', 'no', 'off'):
        return False
    raise ValueError(f"not a boolean: {text}")


def _scheme(text: str) -> str:
    return text.strip().upper()


def load_config(path, seed: Optional[int] = None, trials: Optional[int] = None,
                out: Optional[str] = None) -> ExperimentConfig:
    """Read an experiment config; keyword arguments override file keys."""
    text = Path(path).read_text(encoding='utf-8')
    raw = dotenv_values(stream=io.StringIO(text))
    unknown = sorted(set(raw) - CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"Unknown config keys: {', '.join(unknown)}")
    empty = sorted(key for key, value in raw.items() if value is None or not value.strip())
    if empty:
        raise ConfigError(f"Config keys without a value: {', '.join(empty)}")
    if 'experiment' not in raw:
        raise ConfigError("Config must set 'experiment'")

    try:
        return _build_config(raw, str(path), seed, trials, out)
    except (ValueError, TypeError) as exc:
        if isinstance(exc, SimulationError):
            raise
        raise ConfigError(f"Malformed config value: {exc}") from exc


def _build_config(raw: dict, source: str, seed, trials, out) -> ExperimentConfig:
    kind = raw['experiment'].strip()
    N = int(raw.get('N', 2))
    b = _bits(raw['b']) if 'b' in raw else 3
    params = ScenarioParams(
        scenario=_scenario(raw.get('scenario', 'I')),
        N=N,
        K=int(raw.get('K', 2)),
        b=None if b == math.inf else b,
        beta=float(raw.get('beta', 0.9)),
        m_G=float(raw.get('m_G', 2.0)),
        m_g=float(raw.get('m_g', 1.0)),
        m_h=float(raw.get('m_h', 1.0)),
    )

    rates = _list(raw['rates']) if 'rates' in raw else (1.0,)
    if len(rates) == 1:
        rates = rates * N
    if 'alphas' in raw:
        noma = NomaConfig(alphas=_list(raw['alphas']), rates=rates)
    else:
        noma = NomaConfig(alphas=NomaConfig.default_allocation(N).alphas, rates=rates)

    sweep = raw.get('sweep', SweepAxis.RHO_DB).strip()
    if 'values' in raw:
        values = _list(raw['values'], _bits if sweep == SweepAxis.BITS else float)
    elif sweep == SweepAxis.RHO_DB:
        values = DEFAULT_RHO_DB
    else:
        raise ConfigError(f"Sweep over {sweep} needs explicit 'values'")

    is_outage = kind in (ExperimentKind.OUTAGE_SWEEP, ExperimentKind.DIVERSITY_FIT)
    default_trials = DEFAULT_OUTAGE_TRIALS if is_outage else DEFAULT_RATIO_TRIALS
    fdr = FdrParams(
        power_split=float(raw.get('fdr_power_split', 0.5)),
        m_SI=FadingParam(float(raw.get('fdr_m_SI', 1.0)), float(raw.get('fdr_omega_SI', 0.01))),
        m_BR=FadingParam(float(raw.get('fdr_m_BR', 2.0))),
        m_RU=FadingParam(float(raw.get('fdr_m_RU', 1.0))),
    )
    fit_window = _list(raw['fit_window']) if 'fit_window' in raw else None
    if fit_window is not None and len(fit_window) != 2:
        raise ConfigError(f"fit_window takes two dB values, got {fit_window}")

    return ExperimentConfig(
        kind=kind,
        params=params,
        noma=noma,
        schemes=_list(raw.get('schemes', Scheme.NOMA), _scheme),
        sweep=sweep,
        values=values,
        rho_db=float(raw.get('rho_db', DEFAULT_FIXED_RHO_DB)),
        trials=trials if trials is not None else int(float(raw.get('trials', default_trials))),
        seed=seed if seed is not None else int(raw.get('seed', 0)),
        out=out if out is not None else raw.get('out', 'results.csv'),
        fast_path=_bool(raw.get('fast_path', 'false')),
        fdr=fdr,
        fit_window=fit_window,
        source=source,
    )


# Running

def _b_column(params: ScenarioParams):
    return math.inf if params.b is None else params.b


def _base_row(config: ExperimentConfig, params: ScenarioParams, scheme: str, **fields) -> ResultRow:
    return ResultRow(
        experiment=config.kind,
        scenario=params.scenario,
        scheme=scheme,
        b=_b_column(params),
        K=params.K,
        N=params.N,
        **fields,
    )


def _bounds(summary: RunSummary, params: ScenarioParams, noma: NomaConfig, scheme: str, rho: float):
    """Per-user ``(upper, lower)``; blanks when the asymptotics do not apply."""
    if scheme == Scheme.FDR:
        return [(None, None)] * params.N
    try:
        if scheme == Scheme.NOMA:
            thresholds = noma_thresholds(noma.alphas, noma.rates, rho)
            bound_sets = [outage_bounds_noma(n, params, thresholds) for n in range(1, params.N + 1)]
        else:
            bound_sets = [outage_bounds_oma(params, noma.rates, rho)] * params.N
    except UnsupportedParameters as exc:
        summary.note(exc.code, str(exc))
        return [(None, None)] * params.N
    return [(bound.upper, bound.lower) for bound in bound_sets]


def _diversity(params: ScenarioParams, scheme: str, n: int):
    if scheme == Scheme.FDR:
        return None
    return float(diversity_order(scheme, params.scenario, n, params))


def _estimate(config: ExperimentConfig, params: ScenarioParams, scheme: str, rhos, workers: int):
    stream = RngStream(config.seed, SCHEME_STREAMS[scheme])
    if scheme == Scheme.FDR:
        return estimate_outage_fdr_sweep(params, config.noma, config.fdr, rhos, config.trials, stream, workers)
    return estimate_outage_sweep(
        params, config.noma, scheme, rhos, config.trials, stream, workers, config.fast_path
    )


def _sweep_points(config: ExperimentConfig):
    """``(params, [rho_db...])`` groups; an SNR sweep is one group on shared draws."""
    if config.sweep == SweepAxis.RHO_DB:
        return [(config.params, list(config.values))]
    return [(config.point_params(value), [config.rho_db]) for value in config.values]


def _outage_rows(config: ExperimentConfig, summary: RunSummary, workers: int):
    rows = []
    for scheme in config.schemes:
        for params, rho_dbs in _sweep_points(config):
            rhos = [from_db(rho_db) for rho_db in rho_dbs]
            sweep = _estimate(config, params, scheme, rhos, workers)
            for rho_db, rho, estimates in zip(rho_dbs, rhos, sweep):
                bounds = _bounds(summary, params, config.noma, scheme, rho)
                for estimate, (upper, lower) in zip(estimates, bounds):
                    rows.append(_base_row(
                        config, params, scheme,
                        user=estimate.user_index,
                        rho_db=float(rho_db),
                        trials=estimate.trials,
                        failures=estimate.failures,
                        p_hat=estimate.p_hat,
                        ci_low=estimate.ci_low,
                        ci_high=estimate.ci_high,
                        analytic_upper=upper,
                        analytic_lower=lower,
                        diversity=_diversity(params, scheme, estimate.user_index),
                    ))
    return rows


def _bounds_rows(config: ExperimentConfig, summary: RunSummary):
    rows = []
    for scheme in config.schemes:
        if scheme == Scheme.FDR:
            summary.note('unsupported-parameters', "FDR has no closed-form bounds")
            continue
        for params, rho_dbs in _sweep_points(config):
            for rho_db in rho_dbs:
                bounds = _bounds(summary, params, config.noma, scheme, from_db(rho_db))
                for n, (upper, lower) in enumerate(bounds, start=1):
                    rows.append(_base_row(
                        config, params, scheme,
                        user=n,
                        rho_db=float(rho_db),
                        analytic_upper=upper,
                        analytic_lower=lower,
                        diversity=_diversity(params, scheme, n),
                    ))
    return rows


def _ratio_rows(config: ExperimentConfig, workers: int):
    rows = []
    stream = RngStream(config.seed, RATIO_STREAM)
    for value in config.values:
        params = config.point_params(value)
        ratio = gain_ratio(params, config.trials, stream, workers)
        # per-realization bound only holds without a direct link
        lower = None
        if not params.has_direct_link:
            lower = 1.0 if params.b is None else math.cos(math.pi / 2 ** params.b)
        rows.append(_base_row(
            config, params, '',
            user=None,
            rho_db=None,
            trials=config.trials,
            p_hat=ratio,
            analytic_upper=1.0,
            analytic_lower=lower,
        ))
    return rows


def _fit_rows(config: ExperimentConfig, summary: RunSummary, rows):
    fit_rows = []
    for scheme in config.schemes:
        for n in range(1, config.params.N + 1):
            user_rows = [row for row in rows if row.scheme == scheme and row.user == n]
            try:
                fit = fit_diversity(user_rows, config.fit_window)
            except InsufficientData as exc:
                summary.note(exc.code, f"{scheme} U{n}: {exc}")
                continue
            logger.info("%s U%d diversity slope %.3f (R^2 %.4f, %d points)",
                        scheme, n, fit.slope, fit.r_squared, fit.points_used)
            summary.fits.append((scheme, n, fit))
            fit_rows.append(_base_row(
                config, config.params, scheme,
                user=n,
                rho_db=None,
                diversity=fit.slope,
            ))
    return fit_rows


def run(config: ExperimentConfig, workers: int = 1) -> RunSummary:
    logger.info("Running %s experiment (seed %d, %d trials) -> %s",
                config.kind, config.seed, config.trials, config.out)
    summary = RunSummary(config=config, rows=[], output_path=str(config.out))
    if config.kind == ExperimentKind.GAIN_RATIO:
        summary.rows = _ratio_rows(config, workers)
    elif config.kind == ExperimentKind.BOUNDS_TABLE:
        summary.rows = _bounds_rows(config, summary)
    else:
        summary.rows = _outage_rows(config, summary, workers)
        if config.kind == ExperimentKind.DIVERSITY_FIT:
            summary.rows += _fit_rows(config, summary, summary.rows)

    write_csv(config.out, summary.rows)
    logger.info("Wrote %d rows to %s", summary.rows_written, config.out)
    return summary


# CSV

def _format(value) -> str:
    if value is None:
        return ''
    if isinstance(value, (bool, np.bool_)):
        raise InvalidParameter(f"Unexpected boolean in CSV row: {value}")
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow([_format(getattr(row, column)) for column in CSV_HEADER])


def _optional(parse):
    return lambda text: parse(text) if text != '' else None


def _bits_column(text: str):
    return float(text) if text == 'inf' else int(text)


COLUMN_PARSERS = {
    'experiment': str,
    'scenario': str,
    'scheme': str,
    'user': _optional(int),
    'rho_db': _optional(float),
    'b': _optional(_bits_column),
    'K': int,
    'N': int,
    'trials': _optional(int),
    'failures': _optional(int),
    'p_hat': _optional(float),
    'ci_low': _optional(float),
    'ci_high': _optional(float),
    'analytic_upper': _optional(float),
    'analytic_lower': _optional(float),
    'diversity': _optional(float),
}


def read_csv(path) -> list:
    with Path(path).open(newline='', encoding='utf-8') as f:
        reader = csv.reader(f)
        header = tuple(next(reader, ()))
        if header != CSV_HEADER:
            raise InvalidParameter(f"Unexpected CSV header: {','.join(header)}")
        return [
            ResultRow(**{column: COLUMN_PARSERS[column](text) for column, text in zip(CSV_HEADER, record)})
            for record in reader
        ]


# Slope fitting

def fit_diversity(rows, window: Optional[tuple] = None) -> SlopeFit:
    """Least-squares slope of ``log10(p_hat)`` against ``rho_db/10`` for one user.

    Only points with ``failures >= MIN_FAILURES`` count. Without a ``window``
    (low, high dB) the points with ``1e-5 < p_hat < 1e-2`` are used.
    """
    points = [
        row for row in rows
        if row.rho_db is not None and row.p_hat is not None and row.p_hat > 0
        and row.failures is not None and row.failures >= MIN_FAILURES
    ]
    if window is not None:
        low, high = window
        points = [row for row in points if low <= row.rho_db <= high]
    else:
        points = [row for row in points if FIT_P_RANGE[0] < row.p_hat < FIT_P_RANGE[1]]
    if len(points) < 3:
        raise InsufficientData(f"Need 3 usable points for a slope fit, got {len(points)}")

    x = np.array([row.rho_db for row in points]) / 10.0
    y = np.log10([row.p_hat for row in points])
    result = stats.linregress(x, y)
    return SlopeFit(
        slope=float(-result.slope),
        intercept=float(result.intercept),
        r_squared=float(result.rvalue ** 2),
        window=(float(x.min() * 10.0), float(x.max() * 10.0)),
        points_used=len(points),
    )


# Persistence

def record_run(summary: RunSummary):
    config = summary.config
    with transaction.atomic():
        experiment_run = ExperimentRun.objects.create(
            kind=config.kind,
            scenario=config.params.scenario,
            seed=config.seed,
            trials=config.trials,
            config_path=config.source,
            output_path=summary.output_path,
            rows_written=summary.rows_written,
            notes='\n'.join(summary.notes),
            fits='\n'.join(
                f"{scheme} U{n}: slope={fit.slope:.4f} r2={fit.r_squared:.4f} "
                f"window={fit.window[0]:g}..{fit.window[1]:g} dB points={fit.points_used}"
                for scheme, n, fit in summary.fits
            ),
        )
        SweepResult.objects.bulk_create([
            SweepResult(run=experiment_run, position=position, **SweepResult.fields_from_row(row))
            for position, row in enumerate(summary.rows)
        ])
    logger.info("Recorded run %s with %d results", experiment_run.pk, summary.rows_written)
    return experiment_run
