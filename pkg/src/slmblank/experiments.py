"""Seeded Monte Carlo experiments: threshold, U, beta and gamma sweeps, gain series.

Every trial draws its randomness from ``derive_stream(master_seed, trial, lane)``
with one lane each for data bits, AWGN and impulses. Trials run independently
(optionally on a thread pool) and are reduced in ascending trial order, so
results do not depend on the worker count.
"""

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from slmblank.blanking import (
    ThresholdSpec,
    blank,
    blank_with_spec,
    envelope_stats,
)
from slmblank.channel import ChannelParams, awgn_noise, impulsive_noise
from slmblank.errors import ConfigurationError
from slmblank.metrics import SnrMeasurement, linear_to_db, relative_gain_db
from slmblank.signal_core import is_power_of_two, qam16_modulate
from slmblank.slm import PhaseVectorSet, generate_phase_vectors, slm_select

LANE_BITS = 0
LANE_AWGN = 1
LANE_IMPULSE = 2

_TRIAL_DOMAIN = 0x545249

DEFAULT_U_VALUES = (1, 2, 4, 8, 16, 32, 64, 128, 256)

SWEEP_HEADER = ["param", "value", "mean_snr_db", "symbols", "excluded_symbols"]
TRIAL_HEADER = ["trial", "u", "applied_threshold", "snr_db", "gain_db", "seed", "symbols"]


def grid_values(t_min: float, t_max: float, t_step: float) -> np.ndarray:
    """Inclusive arithmetic grid, rounded to suppress accumulated step error."""
    if not t_step > 0:
        raise ConfigurationError(f"grid step must be > 0, got {t_step}")
    if t_max < t_min:
        raise ConfigurationError(f"grid max {t_max} < grid min {t_min}")
    count = int(math.floor((t_max - t_min) / t_step + 1e-9)) + 1
    return np.round(t_min + t_step * np.arange(count), 12)


@dataclass(frozen=True)
class ExperimentConfig:
    n: int = 64
    u_count: int = 64
    sbnr_db: float = 40.0
    sinr_db: float = -10.0
    p: float = 0.01
    gamma: float = 7.0
    symbols_per_point: int = 100
    trials: int = 50
    master_seed: int = 1
    # (t_min, t_max, t_step)
    threshold_grid: tuple = (0.05, 5.0, 0.05)
    u_values: tuple = DEFAULT_U_VALUES
    beta_grid: tuple = (0.25, 20.0, 0.25)
    gamma_grid: tuple = (1.0, 20.0, 1.0)
    # Fixed blanking threshold for single runs; None selects the optimized threshold.
    threshold: float | None = None
    workers: int = 1

    def __post_init__(self):
        if not is_power_of_two(self.n):
            raise ConfigurationError(f"n={self.n} is not a power of two")
        if self.u_count < 1:
            raise ConfigurationError(f"u_count must be >= 1, got {self.u_count}")
        if not self.u_values or min(self.u_values) < 1:
            raise ConfigurationError(f"u_values must be nonempty and >= 1: {self.u_values}")
        if self.symbols_per_point < 1 or self.trials < 1:
            raise ConfigurationError("symbols_per_point and trials must be >= 1")
        if self.workers < 1:
            raise ConfigurationError(f"workers must be >= 1, got {self.workers}")
        if not self.gamma > 0:
            raise ConfigurationError(f"gamma must be > 0, got {self.gamma}")
        if self.threshold is not None and not self.threshold >= 0:
            raise ConfigurationError(f"threshold must be >= 0, got {self.threshold}")
        for name in ("threshold_grid", "beta_grid", "gamma_grid"):
            grid_values(*getattr(self, name))
        self.channel  # validates p

    @property
    def channel(self) -> ChannelParams:
        return ChannelParams(self.sbnr_db, self.sinr_db, self.p)

    @property
    def threshold_spec(self) -> ThresholdSpec:
        if self.threshold is None:
            return ThresholdSpec.optimized(self.gamma)
        return ThresholdSpec.fixed(self.threshold)

    def phase_vectors(self, u_count: int | None = None) -> PhaseVectorSet:
        return generate_phase_vectors(u_count or self.u_count, self.n, self.master_seed)


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    u: int
    applied_threshold: float
    snr_db: float
    gain_db: float | None
    seed: int
    symbols: int


@dataclass
class SweepResult:
    parameter: str
    values: np.ndarray
    signal_energy: np.ndarray
    error_energy: np.ndarray
    symbols: np.ndarray
    excluded: np.ndarray
    u_count: int
    per_trial_argmax: np.ndarray = field(default_factory=lambda: np.empty(0))

    @property
    def snr_db(self) -> np.ndarray:
        """Ensemble SNR per grid value; ``inf`` with zero error, ``nan`` with no symbols."""
        out = np.full(len(self.values), np.nan)
        for k, (es, ee, ns) in enumerate(zip(self.signal_energy, self.error_energy, self.symbols)):
            if ns > 0:
                out[k] = linear_to_db(SnrMeasurement(es, ee, int(ns)).linear)
        return out

    @property
    def argmax_index(self) -> int:
        return _argmax_smallest(self.values, self.snr_db)

    @property
    def argmax(self) -> float:
        return float(self.values[self.argmax_index])

    @property
    def best_snr_db(self) -> float:
        return float(self.snr_db[self.argmax_index])


@dataclass
class USweepResult:
    """Threshold sweeps at several U, all on the same bits and noise."""

    u_values: tuple
    curves: list

    @property
    def obt(self) -> np.ndarray:
        return np.array([c.argmax for c in self.curves])

    @property
    def best_snr_db(self) -> np.ndarray:
        return np.array([c.best_snr_db for c in self.curves])


def _argmax_smallest(values, scores) -> int:
    scores = np.asarray(scores, dtype=float)
    finite = ~np.isnan(scores)
    if not finite.any():
        raise ConfigurationError("no grid point produced a measurable SNR")
    best = np.max(scores[finite])
    candidates = np.flatnonzero(finite & (scores == best))
    return int(candidates[np.argmin(np.asarray(values)[candidates])])


# -- randomness ---------------------------------------------------------------


def derive_stream(master_seed: int, trial_index: int, lane: int) -> np.random.Generator:
    """Independent generator for one (trial, lane) pair.

    The key is hashed through ``SeedSequence``, so streams for distinct pairs
    are statistically independent and need no coordination between workers.
    """
    ss = np.random.SeedSequence(master_seed, spawn_key=(_TRIAL_DOMAIN, trial_index, lane))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass
class TrialStreams:
    bits: np.random.Generator
    awgn: np.random.Generator
    impulse: np.random.Generator

    @classmethod
    def for_trial(cls, master_seed: int, trial_index: int) -> "TrialStreams":
        return cls(
            derive_stream(master_seed, trial_index, LANE_BITS),
            derive_stream(master_seed, trial_index, LANE_AWGN),
            derive_stream(master_seed, trial_index, LANE_IMPULSE),
        )


def _draw(config: ExperimentConfig, streams: TrialStreams, n_symbols: int):
    """Data symbols and the two noise components for ``n_symbols`` OFDM symbols."""
    bits = streams.bits.integers(0, 2, size=(n_symbols, 4 * config.n), dtype=np.uint8)
    freq = qam16_modulate(bits)
    params = config.channel
    w = awgn_noise(freq.shape, params.sigma_w_sq, streams.awgn)
    i, _ = impulsive_noise(freq.shape, params.p, params.sigma_i_sq, streams.impulse)
    return freq, w, i


def _symbol_energies(s: np.ndarray, y: np.ndarray):
    return np.sum(np.abs(s) ** 2, axis=-1), np.sum(np.abs(y - s) ** 2, axis=-1)


def _map_trials(fn, trials: int, workers: int) -> list:
    if workers <= 1 or trials <= 1:
        return [fn(t) for t in range(trials)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(trials)))


# -- single-run pipeline ------------------------------------------------------


@dataclass(frozen=True)
class BlockOutcome:
    measurement: SnrMeasurement
    applied: np.ndarray
    transmitted: np.ndarray
    received: np.ndarray
    blanked: np.ndarray


def run_block(
    config: ExperimentConfig,
    spec: ThresholdSpec,
    streams: TrialStreams,
    n_symbols: int,
    vectors: PhaseVectorSet | None = None,
) -> BlockOutcome:
    """bits -> 16-QAM -> SLM -> channel -> blanking, for ``n_symbols`` symbols."""
    vectors = vectors or config.phase_vectors()
    freq, w, i = _draw(config, streams, n_symbols)
    s = slm_select(freq, vectors).signal
    r = s + w + i
    y, applied = blank_with_spec(r, spec)
    es, ee = _symbol_energies(s, y)
    meas = SnrMeasurement(float(np.sum(es)), float(np.sum(ee)), s.size)
    applied = np.broadcast_to(np.asarray(applied, dtype=float), (n_symbols,))
    return BlockOutcome(meas, applied, s, r, y)


def run_symbol(
    config: ExperimentConfig,
    spec: ThresholdSpec,
    streams: TrialStreams,
    vectors: PhaseVectorSet | None = None,
):
    """One OFDM symbol through the pipeline; returns ``(measurement, threshold)``."""
    out = run_block(config, spec, streams, 1, vectors)
    return out.measurement, float(out.applied[0])


def run_trials(config: ExperimentConfig) -> list[TrialRecord]:
    """``config.trials`` independent measurements at ``config.u_count``."""
    vectors = config.phase_vectors()
    spec = config.threshold_spec

    def one(t):
        out = run_block(
            config, spec, TrialStreams.for_trial(config.master_seed, t),
            config.symbols_per_point, vectors,
        )
        return TrialRecord(
            trial=t,
            u=config.u_count,
            applied_threshold=float(np.mean(out.applied)),
            snr_db=linear_to_db(out.measurement.linear),
            gain_db=None,
            seed=config.master_seed,
            symbols=config.symbols_per_point,
        )

    return _map_trials(one, config.trials, config.workers)


# -- sweeps -------------------------------------------------------------------


def _reduce(parameter, values, per_trial, u_count) -> SweepResult:
    """Sum per-trial energy tables in trial order."""
    g = len(values)
    es, ee = np.zeros(g), np.zeros(g)
    ns, nx = np.zeros(g, dtype=np.int64), np.zeros(g, dtype=np.int64)
    trial_best = []
    for t_es, t_ee, t_ns, t_nx in per_trial:
        es += t_es
        ee += t_ee
        ns += t_ns
        nx += t_nx
        with np.errstate(divide="ignore", invalid="ignore"):
            t_snr = np.where(t_ns > 0, t_es / t_ee, np.nan)
        trial_best.append(values[_argmax_smallest(values, t_snr)])
    return SweepResult(parameter, np.asarray(values), es, ee, ns, nx, u_count,
                       np.asarray(trial_best))


def _fixed_threshold_table(s, r, grid):
    g = len(grid)
    es, ee = np.zeros(g), np.zeros(g)
    sig = float(np.sum(np.abs(s) ** 2))
    for k, t in enumerate(grid):
        es[k] = sig
        ee[k] = float(np.sum(np.abs(blank(r, t) - s) ** 2))
    count = np.full(g, s.shape[0], dtype=np.int64)
    return es, ee, count, np.zeros(g, dtype=np.int64)


def _sweep_fixed(config: ExperimentConfig, u_values) -> list[SweepResult]:
    grid = grid_values(*config.threshold_grid)
    vectors = config.phase_vectors(max(u_values))

    def one(t):
        freq, w, i = _draw(config, TrialStreams.for_trial(config.master_seed, t),
                           config.symbols_per_point)
        tables = []
        for u in u_values:
            s = slm_select(freq, vectors.head(u)).signal
            tables.append(_fixed_threshold_table(s, s + w + i, grid))
        return tables

    per_trial = _map_trials(one, config.trials, config.workers)
    return [
        _reduce("threshold", grid, [tables[k] for tables in per_trial], u)
        for k, u in enumerate(u_values)
    ]


def sweep_threshold(config: ExperimentConfig) -> SweepResult:
    """Fixed-threshold sweep at ``config.u_count``; the argmax is the OBT."""
    return _sweep_fixed(config, (config.u_count,))[0]


def sweep_u(config: ExperimentConfig, u_values=None) -> USweepResult:
    """Threshold sweep at each U with nested phase vectors and shared noise."""
    u_values = tuple(config.u_values if u_values is None else u_values)
    if not u_values or min(u_values) < 1:
        raise ConfigurationError(f"u_values must be nonempty and >= 1: {u_values}")
    return USweepResult(u_values, _sweep_fixed(config, u_values))


def _sweep_statistic(config: ExperimentConfig, parameter, values, thresholds_for) -> SweepResult:
    """Sweep where each grid value maps the envelope stats to per-symbol thresholds.

    ``thresholds_for(stats, value)`` returns ``(thresholds, valid)`` per symbol;
    invalid symbols are excluded from the energy sums and counted.
    """
    vectors = config.phase_vectors()
    values = np.asarray(values, dtype=float)

    def one(t):
        freq, w, i = _draw(config, TrialStreams.for_trial(config.master_seed, t),
                           config.symbols_per_point)
        s = slm_select(freq, vectors).signal
        r = s + w + i
        stats = envelope_stats(r)
        g = len(values)
        es, ee = np.zeros(g), np.zeros(g)
        ns, nx = np.zeros(g, dtype=np.int64), np.zeros(g, dtype=np.int64)
        for k, v in enumerate(values):
            thr, valid = thresholds_for(stats, v)
            y = blank(r[valid], thr[valid][:, None])
            sym_es, sym_ee = _symbol_energies(s[valid], y)
            es[k], ee[k] = float(np.sum(sym_es)), float(np.sum(sym_ee))
            ns[k] = int(valid.sum())
            nx[k] = len(valid) - ns[k]
        return es, ee, ns, nx

    per_trial = _map_trials(one, config.trials, config.workers)
    return _reduce(parameter, values, per_trial, config.u_count)


def sweep_beta(config: ExperimentConfig, beta_values=None) -> SweepResult:
    """Threshold ``INE / beta`` with measured INE and the swept beta substituted."""
    beta_values = grid_values(*config.beta_grid) if beta_values is None else beta_values
    if np.any(np.asarray(beta_values, dtype=float) <= 0):
        raise ConfigurationError(f"beta values must be > 0: {beta_values}")

    def thresholds(stats, beta):
        ine = np.asarray(stats.max) - np.asarray(stats.mean)
        return ine / beta, np.ones(ine.shape, dtype=bool)

    return _sweep_statistic(config, "beta", beta_values, thresholds)


def sweep_gamma(config: ExperimentConfig, gamma_values=None) -> SweepResult:
    """Full optimized threshold per grid gamma; symbols with ``beta <= 0`` are excluded."""
    gamma_values = grid_values(*config.gamma_grid) if gamma_values is None else gamma_values
    if np.any(np.asarray(gamma_values, dtype=float) <= 0):
        raise ConfigurationError(f"gamma values must be > 0: {gamma_values}")

    def thresholds(stats, gamma):
        mean = np.asarray(stats.mean)
        ine = np.asarray(stats.max) - mean
        beta = gamma - (np.asarray(stats.median) - mean)
        valid = beta > 0
        thr = np.zeros_like(ine)
        thr[valid] = ine[valid] / beta[valid]
        return thr, valid

    return _sweep_statistic(config, "gamma", gamma_values, thresholds)


def gain_series(config: ExperimentConfig, u_values=None, series_length=None) -> list[TrialRecord]:
    """Per-trial gain of SLM at each U over the unmodified (U=1) system.

    Both arms of a trial see the same data bits and the same noise samples;
    only the transmitted signal differs.
    """
    u_values = tuple((config.u_count,) if u_values is None else u_values)
    series_length = config.trials if series_length is None else series_length
    if series_length < 1:
        raise ConfigurationError(f"series_length must be >= 1, got {series_length}")
    vectors = config.phase_vectors(max(u_values))
    spec = config.threshold_spec

    def arm(s, w, i):
        y, applied = blank_with_spec(s + w + i, spec)
        es, ee = _symbol_energies(s, y)
        meas = SnrMeasurement(float(np.sum(es)), float(np.sum(ee)), s.size)
        return meas.linear, float(np.mean(applied))

    def one(t):
        freq, w, i = _draw(config, TrialStreams.for_trial(config.master_seed, t),
                           config.symbols_per_point)
        base_snr, _ = arm(slm_select(freq, vectors.head(1)).signal, w, i)
        records = []
        for u in u_values:
            snr, applied = arm(slm_select(freq, vectors.head(u)).signal, w, i)
            records.append(TrialRecord(
                trial=t,
                u=u,
                applied_threshold=applied,
                snr_db=linear_to_db(snr),
                gain_db=relative_gain_db(snr, base_snr),
                seed=config.master_seed,
                symbols=config.symbols_per_point,
            ))
        return records

    per_trial = _map_trials(one, series_length, config.workers)
    return [rec for records in per_trial for rec in records]


# -- CSV ------------------------------------------------------------------------


def format_float(x: float | None) -> str:
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.6g}"


def _parse_float(text: str) -> float | None:
    return None if text == "" else float(text)


def _sweep_rows(result: SweepResult, parameter: str | None = None):
    name = parameter or result.parameter
    for v, snr, ns, nx in zip(result.values, result.snr_db, result.symbols, result.excluded):
        yield [name, format_float(v), format_float(snr), str(int(ns)), str(int(nx))]


def write_csv(result, path) -> Path:
    """Write a sweep, a U sweep, or a list of trial records.

    A U sweep is written as consecutive threshold curves whose ``param`` is
    ``threshold_u<U>``.
    """
    path = Path(path)
    if isinstance(result, SweepResult):
        header, rows = SWEEP_HEADER, list(_sweep_rows(result))
    elif isinstance(result, USweepResult):
        header = SWEEP_HEADER
        rows = [row for u, c in zip(result.u_values, result.curves)
                for row in _sweep_rows(c, f"threshold_u{u}")]
    else:
        header = TRIAL_HEADER
        rows = [
            [str(r.trial), str(r.u), format_float(r.applied_threshold), format_float(r.snr_db),
             format_float(r.gain_db), str(r.seed), str(r.symbols)]
            for r in result
        ]
    try:
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write CSV to {path}: {exc.strerror}") from exc
    return path


def read_trial_records(path) -> list[TrialRecord]:
    with Path(path).open(newline="") as fh:
        return [
            TrialRecord(
                trial=int(row["trial"]),
                u=int(row["u"]),
                applied_threshold=float(row["applied_threshold"]),
                snr_db=float(row["snr_db"]),
                gain_db=_parse_float(row["gain_db"]),
                seed=int(row["seed"]),
                symbols=int(row["symbols"]),
            )
            for row in csv.DictReader(fh)
        ]


def read_sweep_rows(path) -> list[tuple]:
    with Path(path).open(newline="") as fh:
        return [
            (row["param"], float(row["value"]), float(row["mean_snr_db"]),
             int(row["symbols"]), int(row["excluded_symbols"]))
            for row in csv.DictReader(fh)
        ]
