"""Command-line front end: `estimate run`, `estimate demo`, `estimate complexity`."""

import argparse
import dataclasses
import sys

from .harness import (
    ConfigError,
    ExperimentConfig,
    aggregate_records,
    emit_results,
    load_config,
    run_experiment,
)
from .metrics import complexity_formula


def _parse_snr_range(text):
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("--snr expects a:b:step")
    start, stop, step = (float(p) for p in parts)
    if step <= 0:
        raise argparse.ArgumentTypeError("--snr step must be positive")
    grid = []
    value = start
    while value <= stop + 1e-9:
        grid.append(round(value, 9))
        value += step
    return tuple(grid)


def _parse_snr_list(text):
    try:
        return tuple(float(p) for p in text.split(","))
    except ValueError as err:
        raise argparse.ArgumentTypeError(f"--snr-list: {err}")


def _apply_overrides(cfg, args):
    changes = {}
    if getattr(args, "snr", None):
        changes["snr_grid_db"] = args.snr
    if getattr(args, "snr_list", None):
        changes["snr_grid_db"] = args.snr_list
    if getattr(args, "trials", None) is not None:
        changes["trials"] = args.trials
    if getattr(args, "seed", None) is not None:
        changes["master_seed"] = args.seed
    if getattr(args, "estimators", None):
        changes["estimators_enabled"] = tuple(
            name.strip() for name in args.estimators.split(",") if name.strip()
        )
    if getattr(args, "workers", None) is not None:
        changes["workers"] = args.workers
    if getattr(args, "out", None):
        changes["output_path"] = args.out
    if getattr(args, "format", None):
        changes["output_format"] = args.format
    return dataclasses.replace(cfg, **changes) if changes else cfg


def _print_aggregate_table(aggregates, stream):
    """Mean aggregate NMSE (and iterations) per estimator across the SNR grid."""
    snrs = sorted({row["snr_db"] for row in aggregates})
    names = sorted({row["estimator"] for row in aggregates})
    cells = {(row["estimator"], row["snr_db"]): row for row in aggregates}

    def fmt(value, width=12):
        return f"{value:>{width}.4e}" if value is not None else " " * (width - 1) + "-"

    header = "mean aggregate NMSE" + " " * 3 + "".join(f"{f'{s:g} dB':>12}" for s in snrs)
    print(header, file=stream)
    for name in names:
        row = f"{name:<22}" + "".join(fmt(cells[(name, s)]["mean_nmse_aggregate"]) for s in snrs)
        print(row, file=stream)
    print("mean iterations", file=stream)
    for name in names:
        values = []
        for s in snrs:
            mean_it = cells[(name, s)]["mean_iterations"]
            values.append(f"{mean_it:>12.2f}" if mean_it is not None else " " * 11 + "-")
        print(f"{name:<22}" + "".join(values), file=stream)
    failures = sum(row["failures"] for row in aggregates)
    if failures:
        print(f"failures excluded from means: {failures}", file=stream)


def _cmd_run(args):
    cfg = _apply_overrides(load_config(args.config), args)
    records = run_experiment(cfg)
    _print_aggregate_table(aggregate_records(records), sys.stdout)
    if cfg.output_path:
        emit_results(records, cfg.output_path, cfg.output_format, config=cfg)
        print(f"wrote {len(records)} records to {cfg.output_path}")
    return 0


def _cmd_demo(args):
    cfg = _apply_overrides(ExperimentConfig(), args)
    print(
        f"default scenario: {cfg.system.m_ap} AP antennas, {cfg.system.k_users} users, "
        f"{cfg.system.n_ris} RIS elements, {cfg.trials} trials per SNR"
    )
    records = run_experiment(cfg)
    _print_aggregate_table(aggregate_records(records), sys.stdout)
    if cfg.output_path:
        emit_results(records, cfg.output_path, cfg.output_format, config=cfg)
        print(f"wrote {len(records)} records to {cfg.output_path}")
    return 0


def _cmd_complexity(args):
    cfg = load_config(args.config)
    system = cfg.system
    for method in ("two_stage", "e_als"):
        tally = complexity_formula(method, system)
        print(f"{method} (B = {system.blocks(method)}, T = {system.training_len(method)})")
        for update, count in tally.one_time.items():
            print(f"  {update:<16} {count:>14,d}  (one-time)")
        for update, count in tally.per_iteration.items():
            print(f"  {update:<16} {count:>14,d}  per iteration")
        print(f"  {'per-iteration':<16} {tally.per_iteration_total:>14,d}  total")
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="estimate",
        description="Monte Carlo benchmark of RIS-assisted uplink channel estimators.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run an experiment from a config file")
    run_p.add_argument("--config", required=True, help="YAML experiment config")
    snr_group = run_p.add_mutually_exclusive_group()
    snr_group.add_argument("--snr", type=_parse_snr_range, help="SNR sweep a:b:step (dB, inclusive)")
    snr_group.add_argument("--snr-list", type=_parse_snr_list, help="comma-separated SNR values (dB)")
    run_p.add_argument("--trials", type=int)
    run_p.add_argument("--seed", type=int, help="master seed")
    run_p.add_argument("--estimators", help="comma-separated subset of two_stage,e_als,ls")
    run_p.add_argument("--workers", type=int)
    run_p.add_argument("--out", help="output file path")
    run_p.add_argument("--format", choices=("csv", "json"))

    demo_p = sub.add_parser("demo", help="run the default scenario and print the NMSE table")
    demo_p.add_argument("--trials", type=int)
    demo_p.add_argument("--workers", type=int)
    demo_p.add_argument("--seed", type=int)
    demo_p.add_argument("--out")

    comp_p = sub.add_parser("complexity", help="print analytic operation counts, no simulation")
    comp_p.add_argument("--config", required=True)

    args = parser.parse_args(argv)
    handler = {"run": _cmd_run, "demo": _cmd_demo, "complexity": _cmd_complexity}[args.command]
    try:
        return handler(args)
    except (ConfigError, FileNotFoundError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
