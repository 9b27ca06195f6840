"""Seeded Monte Carlo experiment runner with CSV/JSON emission.

Every (snr, trial) pair derives its own RNG substreams from the master seed,
so the record set is bit-identical no matter how trials are chunked across
workers; all enabled estimators inside a trial share one channel realization
and one noise realization (paired comparison).
"""

import csv
import dataclasses
import hashlib
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import yaml

from .channels import ChannelModelConfig, draw_channels
from .estimators import (
    EstimatorConfig,
    StackedLsSolver,
    e_als_estimate,
    ls_baseline,
    resolve_scaling,
    two_stage_estimate,
)
from .metrics import aggregate_vector_nmse, complexity_formula, nmse
from .signals import SystemConfig, make_schedule, synthesize

ESTIMATOR_NAMES = ("two_stage", "e_als", "ls")

# fixed ordinals keep per-estimator init streams stable under any enabled subset
_INIT_ORDINAL = {"two_stage": 0, "e_als": 1}
_GEOMETRY_TAG = 104729  # entropy word marking the shared-geometry stream


class ConfigError(ValueError):
    """Configuration file failed to parse or validate."""


@dataclass
class ExperimentConfig:
    system: SystemConfig = field(default_factory=SystemConfig)
    channel: ChannelModelConfig = field(default_factory=ChannelModelConfig)
    estimator: EstimatorConfig = field(default_factory=EstimatorConfig)
    snr_grid_db: tuple = (0.0, 10.0, 20.0, 30.0)
    trials: int = 200
    master_seed: int = 12345
    estimators_enabled: tuple = ESTIMATOR_NAMES
    output_path: str = None
    output_format: str = "csv"
    workers: int = 1
    fixed_geometry: bool = False

    def __post_init__(self):
        self.snr_grid_db = tuple(float(v) for v in self.snr_grid_db)
        self.estimators_enabled = tuple(self.estimators_enabled)
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not self.snr_grid_db:
            raise ConfigError("snr_grid_db must not be empty")
        if not self.estimators_enabled:
            raise ConfigError("estimators_enabled must not be empty")
        for name in self.estimators_enabled:
            if name not in ESTIMATOR_NAMES:
                raise ConfigError(
                    f"unknown estimator {name!r}, choose from {', '.join(ESTIMATOR_NAMES)}"
                )
        if self.output_format not in ("csv", "json"):
            raise ConfigError("format must be 'csv' or 'json'")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.master_seed < 0:
            raise ConfigError("master_seed must be non-negative")


@dataclass
class TrialRecord:
    trial_index: int
    snr_db: float
    estimator_name: str
    nmse_aggregate: float = None
    nmse_h_ua: float = None
    nmse_h_ur: float = None
    nmse_h_ra: float = None
    nmse_cascade: float = None
    iterations: int = None
    converged: bool = None
    analytic_ops: int = None
    empirical_ops: int = None
    wall_time_seconds: float = None
    failure_flag: bool = False
    channel_hash: str = ""


CSV_COLUMNS = tuple(f.name for f in dataclasses.fields(TrialRecord))
_FLOAT_COLUMNS = {
    "snr_db",
    "nmse_aggregate",
    "nmse_h_ua",
    "nmse_h_ur",
    "nmse_h_ra",
    "nmse_cascade",
    "wall_time_seconds",
}

_KEY_ALIASES = {"estimators": "estimators_enabled", "output": "output_path", "format": "output_format"}
_SECTION_TYPES = {"system": SystemConfig, "channel": ChannelModelConfig, "estimator": EstimatorConfig}


def _build_section(cls, data, section):
    if not isinstance(data, dict):
        raise ConfigError(f"section '{section}' must be a mapping")
    known = {f.name for f in dataclasses.fields(cls)}
    for key in data:
        if key not in known:
            raise ConfigError(f"unknown key '{key}' in section '{section}'")
    try:
        return cls(**data)
    except ValueError as err:
        raise ConfigError(f"section '{section}': {err}") from err


def load_config(path):
    """Read a YAML experiment config; every omitted field keeps its default."""
    with open(path) as fh:
        try:
            raw = yaml.safe_load(fh)
        except yaml.YAMLError as err:
            raise ConfigError(f"{path}: {err}") from err
    raw = raw or {}
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a mapping")

    kwargs = {}
    for key, value in raw.items():
        key = _KEY_ALIASES.get(key, key)
        if key in _SECTION_TYPES:
            kwargs[key] = _build_section(_SECTION_TYPES[key], value, key)
        elif key in {f.name for f in dataclasses.fields(ExperimentConfig)}:
            kwargs[key] = value
        else:
            raise ConfigError(f"unknown top-level key '{key}'")
    return ExperimentConfig(**kwargs)


def _channel_hash(channels, received):
    digest = hashlib.sha256()
    for arr in (channels.h_ua, channels.h_ra, channels.h_ur):
        digest.update(np.ascontiguousarray(arr).tobytes())
    for mode in sorted(received):
        digest.update(np.ascontiguousarray(received[mode].tensor).tobytes())
        if received[mode].off_stage is not None:
            digest.update(np.ascontiguousarray(received[mode].off_stage).tobytes())
    return digest.hexdigest()[:16]


def _score(name, est, channels, system, snr_db, trial_index, wall, chash):
    base = dict(
        trial_index=trial_index,
        snr_db=snr_db,
        estimator_name=name,
        empirical_ops=est.op_count,
        wall_time_seconds=wall,
        channel_hash=chash,
    )
    if est.failed:
        return TrialRecord(failure_flag=True, iterations=est.iterations, converged=False, **base)
    if name == "ls":
        # no decoupled factors: only the stacked parameter vector is scored
        return TrialRecord(
            nmse_aggregate=aggregate_vector_nmse(est, channels),
            iterations=0,
            converged=True,
            **base,
        )
    resolved = resolve_scaling(est, channels)
    return TrialRecord(
        nmse_aggregate=aggregate_vector_nmse(est, channels),
        nmse_h_ua=nmse(est.h_ua, channels.h_ua),
        nmse_h_ur=nmse(resolved.h_ur, channels.h_ur),
        nmse_h_ra=nmse(resolved.h_ra, channels.h_ra),
        nmse_cascade=nmse(est.cascade, channels.cascade),
        iterations=est.iterations,
        converged=est.converged,
        analytic_ops=complexity_formula(name, system).total(est.iterations),
        **base,
    )


def _trial_streams(cfg, snr_index, trial_index):
    root = np.random.SeedSequence([cfg.master_seed, snr_index, trial_index])
    channel_ss, noise_ss, _reserved = root.spawn(3)
    return channel_ss, noise_ss


def _init_rng(cfg, snr_index, trial_index, name):
    seq = np.random.SeedSequence(
        [cfg.estimator.init_seed, snr_index, trial_index, _INIT_ORDINAL[name]]
    )
    return np.random.default_rng(seq)


def run_trial(cfg, snr_index, trial_index, ls_solver=None, details=False):
    """Run every enabled estimator on one shared (channel, noise) realization."""
    system = dataclasses.replace(cfg.system, snr_db=cfg.snr_grid_db[snr_index])
    schedules = {}
    if "two_stage" in cfg.estimators_enabled:
        schedules["two_stage"] = make_schedule(system, "two_stage")
    if "e_als" in cfg.estimators_enabled or "ls" in cfg.estimators_enabled:
        schedules["e_als"] = make_schedule(system, "e_als")
    if "ls" in cfg.estimators_enabled and ls_solver is None:
        ls_solver = StackedLsSolver(schedules["e_als"], system.m_ap, cfg.estimator.pinv_tol)
    return _run_trial(cfg, system, schedules, ls_solver, snr_index, trial_index, details)


def _run_trial(cfg, system, schedules, ls_solver, snr_index, trial_index, details=False):
    channel_ss, noise_ss = _trial_streams(cfg, snr_index, trial_index)
    dims = (system.m_ap, system.k_users, system.n_ris)
    geometry_rng = None
    if cfg.fixed_geometry:
        geometry_rng = np.random.default_rng(
            np.random.SeedSequence([cfg.master_seed, _GEOMETRY_TAG])
        )
    channels = draw_channels(
        cfg.channel, dims, np.random.default_rng(channel_ss), geometry_rng=geometry_rng
    )
    # one generator per schedule, same seed: both frames see the identical
    # (M, T) noise draw, which is what makes the comparison paired
    received = {
        mode: synthesize(channels, sched, system, np.random.default_rng(noise_ss))
        for mode, sched in schedules.items()
    }
    chash = _channel_hash(channels, received)

    records = []
    estimates = {}
    for name in cfg.estimators_enabled:
        start = time.perf_counter()
        if name == "two_stage":
            est = two_stage_estimate(
                received["two_stage"], schedules["two_stage"], cfg.estimator,
                _init_rng(cfg, snr_index, trial_index, name),
            )
        elif name == "e_als":
            est = e_als_estimate(
                received["e_als"], schedules["e_als"], cfg.estimator,
                _init_rng(cfg, snr_index, trial_index, name),
            )
        else:
            est = ls_baseline(received["e_als"], schedules["e_als"], cfg.estimator, ls_solver)
        wall = time.perf_counter() - start
        records.append(
            _score(name, est, channels, system, cfg.snr_grid_db[snr_index], trial_index, wall, chash)
        )
        estimates[name] = est
    if details:
        return records, estimates, channels
    return records


def _run_chunk(cfg, snr_index, start, stop):
    system = dataclasses.replace(cfg.system, snr_db=cfg.snr_grid_db[snr_index])
    schedules = {}
    if "two_stage" in cfg.estimators_enabled:
        schedules["two_stage"] = make_schedule(system, "two_stage")
    if "e_als" in cfg.estimators_enabled or "ls" in cfg.estimators_enabled:
        schedules["e_als"] = make_schedule(system, "e_als")
    ls_solver = None
    if "ls" in cfg.estimators_enabled:
        ls_solver = StackedLsSolver(schedules["e_als"], system.m_ap, cfg.estimator.pinv_tol)
    records = []
    for trial in range(start, stop):
        records.extend(_run_trial(cfg, system, schedules, ls_solver, snr_index, trial))
    return records


def run_experiment(cfg):
    """All (snr, trial) pairs for every enabled estimator, sorted deterministically."""
    chunk = max(1, math.ceil(cfg.trials / max(1, cfg.workers * 4)))
    tasks = [
        (snr_index, start, min(start + chunk, cfg.trials))
        for snr_index in range(len(cfg.snr_grid_db))
        for start in range(0, cfg.trials, chunk)
    ]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            futures = [pool.submit(_run_chunk, cfg, *task) for task in tasks]
            records = [record for future in futures for record in future.result()]
    else:
        records = [record for task in tasks for record in _run_chunk(cfg, *task)]
    records.sort(key=lambda r: (r.snr_db, r.trial_index, r.estimator_name))
    return records


def _mean(values):
    values = [v for v in values if v is not None]
    return sum(values) / len(values) if values else None


def _median(values):
    values = sorted(v for v in values if v is not None)
    if not values:
        return None
    mid = len(values) // 2
    return values[mid] if len(values) % 2 else (values[mid - 1] + values[mid]) / 2


def aggregate_records(records):
    """Per-(estimator, snr) summary; failed trials are excluded and counted."""
    groups = {}
    for rec in records:
        groups.setdefault((rec.estimator_name, rec.snr_db), []).append(rec)
    summary = []
    for (name, snr_db), recs in sorted(groups.items()):
        ok = [r for r in recs if not r.failure_flag]
        summary.append(
            {
                "estimator": name,
                "snr_db": snr_db,
                "trials": len(recs),
                "failures": len(recs) - len(ok),
                "mean_nmse_aggregate": _mean([r.nmse_aggregate for r in ok]),
                "median_nmse_aggregate": _median([r.nmse_aggregate for r in ok]),
                "mean_iterations": _mean([r.iterations for r in ok]),
                "mean_wall_time_seconds": _mean([r.wall_time_seconds for r in ok]),
                "mean_analytic_ops": _mean([r.analytic_ops for r in ok]),
            }
        )
    return summary


def _csv_cell(column, value):
    if value is None:
        return ""
    if column in _FLOAT_COLUMNS:
        return f"{value:.17g}"
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def emit_results(records, path, fmt="csv", config=None):
    """Write records to path as CSV rows or a JSON document with aggregates."""
    if not records:
        raise ValueError("no records to emit")
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for rec in records:
                writer.writerow(
                    [_csv_cell(col, getattr(rec, col)) for col in CSV_COLUMNS]
                )
    elif fmt == "json":
        document = {
            "config": dataclasses.asdict(config) if config is not None else None,
            "records": [dataclasses.asdict(rec) for rec in records],
            "aggregates": aggregate_records(records),
        }
        with open(path, "w") as fh:
            json.dump(document, fh, indent=2)
            fh.write("\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return aggregate_records(records)


def read_records_json(path):
    """Inverse of the JSON emission, for round-tripping result files."""
    with open(path) as fh:
        document = json.load(fh)
    return [TrialRecord(**rec) for rec in document["records"]]
