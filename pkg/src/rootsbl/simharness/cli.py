"""Command-line entry point: ``rootsbl simulate | estimate | crb | synth``."""

from __future__ import annotations

import argparse
import logging
import sys

from rootsbl.array_model import ArrayGeometry, Scenario, read_snapshots, synthesize_snapshots, write_snapshots
from rootsbl.errors import ContractError, NumericalError
from rootsbl.estimators import ESTIMATORS, EstimatorConfig
from rootsbl.sbl_core import EmConfig
from rootsbl.simharness.config import ConfigError, load_config
from rootsbl.simharness.crb import crb_curve
from rootsbl.simharness.sweep import run_monte_carlo, summarize, write_outputs, write_table

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    rows = run_monte_carlo(cfg, workers=args.workers)
    paths = write_outputs(rows, args.output or cfg.output)
    for rec in summarize(rows):
        print(
            f"{rec['method']:>10} snr={rec['snr_db']:g} r={rec['grid_interval']:g} eta={rec['eta']} "
            f"rmse={rec['rmse']:.4f} median_time={rec['median_elapsed']:.4f}s excluded={rec['excluded']}"
        )
    for kind, path in paths.items():
        print(f"wrote {kind}: {path}")
    return EXIT_OK


def cmd_estimate(args) -> int:
    Y = read_snapshots(args.input)
    geometry = ArrayGeometry(Y.M, args.spacing)
    em = EmConfig(max_iters=args.max_iters, tol_delta=args.tol)
    cfg = EstimatorConfig(geometry, args.r, args.k, em, eta=args.eta)
    res = ESTIMATORS[args.method](Y, cfg)
    print("doas: " + " ".join(f"{d:.4f}" for d in res.doas))
    print(f"iterations: {res.iterations}")
    print(f"elapsed: {res.elapsed:.6f}")
    return EXIT_OK


def cmd_crb(args) -> int:
    cfg = load_config(args.config)
    records = crb_curve(cfg)
    if args.output:
        write_table(records, ("snr_db", "grid_interval", "crb_deg"), args.output)
    print("snr_db,grid_interval,crb_deg")
    for rec in records:
        print(f"{rec['snr_db']!r},{rec['grid_interval']!r},{rec['crb_deg']!r}")
    return EXIT_OK


def cmd_synth(args) -> int:
    sc = Scenario(ArrayGeometry(args.m, args.spacing), tuple(args.doas), args.t, args.snr, args.seed)
    write_snapshots(synthesize_snapshots(sc), args.output)
    print(f"wrote {args.output}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rootsbl", description="Off-grid DOA estimation with root-SBL")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a Monte Carlo sweep from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--workers", type=int, default=None, help="override the config's worker count")
    p.add_argument("--output", default=None, help="override the config's output prefix")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="estimate DOAs from a snapshot file")
    p.add_argument("--input", required=True)
    p.add_argument("--r", type=float, required=True, help="grid interval in degrees")
    p.add_argument("--k", type=int, required=True, help="number of sources")
    p.add_argument("--eta", type=int, default=None, help="active grid points (default: K)")
    p.add_argument("--method", choices=sorted(ESTIMATORS), default="root-sbl")
    p.add_argument("--spacing", type=float, default=0.5, help="sensor spacing in wavelengths")
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--tol", type=float, default=1e-4)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("crb", help="CRB reference curve for a sweep config")
    p.add_argument("--config", required=True)
    p.add_argument("--output", default=None, help="also write the curve to this CSV")
    p.set_defaults(func=cmd_crb)

    p = sub.add_parser("synth", help="write a synthetic snapshot file")
    p.add_argument("--output", required=True)
    p.add_argument("--doas", type=float, nargs="+", required=True)
    p.add_argument("--m", type=int, default=7)
    p.add_argument("--t", type=int, default=30)
    p.add_argument("--snr", type=float, default=10.0)
    p.add_argument("--spacing", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, ContractError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
