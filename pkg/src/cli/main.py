"""
Command-line entry point.

    simulate <scenario.json> [--out DIR] [--propagator METHOD] [--oracle-steps N]
    eigen    <scenario.json> [--time T] [--out DIR]
    sweep    <scenario.json> --param PATH --values v1,v2,... [--workers N] [--out DIR]

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

import argparse
import logging
import os
import sys
from typing import List, Optional

from core import ConfigError, DimensionMismatch, IndexOutOfRange, NumericalError, PropagatorMethod

from .emit import dumps_json, write_csv, write_json
from .runner import run_eigen, run_simulate, run_sweep, write_simulation
from .scenario import load_scenario

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="qcavity",
        description="Tight-binding qubits in a quantum cavity: eigen-analysis, evolution and sweeps."
    )
    ap.add_argument("--log-level", default="WARNING",
                    choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    ap.add_argument("-v", "--verbose", action="count", default=0,
                    help="-v for INFO, -vv for DEBUG")
    sub = ap.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="Sample a trajectory and write timeseries.csv / summary.json")
    sim.add_argument("scenario")
    sim.add_argument("--out", default="out")
    sim.add_argument("--propagator", choices=[m.value for m in PropagatorMethod])
    sim.add_argument("--oracle-steps", type=int)

    eig = sub.add_parser("eigen", help="Instantaneous block spectra at one time")
    eig.add_argument("scenario")
    eig.add_argument("--time", type=float)
    eig.add_argument("--out")

    swp = sub.add_parser("sweep", help="One summary row per parameter value")
    swp.add_argument("scenario")
    swp.add_argument("--param", required=True, help="Dotted path, e.g. qubits.0.ts_mag")
    swp.add_argument("--values", required=True, help="Comma separated: v1,v2,v3")
    swp.add_argument("--workers", type=int, default=1)
    swp.add_argument("--out", default="out")
    return ap


def _configure_logging(args: argparse.Namespace) -> None:
    level = getattr(logging, args.log_level)
    if args.verbose:
        level = min(level, logging.INFO if args.verbose == 1 else logging.DEBUG)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _parse_values(text: str) -> List[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"values must be comma separated numbers, got {text!r}", field="--values")


def run(args: argparse.Namespace) -> int:
    scn = load_scenario(args.scenario)

    if args.command == "simulate":
        scn = scn.with_propagator(args.propagator, args.oracle_steps)
        result = run_simulate(scn)
        csv_path, json_path = write_simulation(result, args.out)
        print(f"Wrote {csv_path} and {json_path}")
    elif args.command == "eigen":
        report = run_eigen(scn, args.time)
        if args.out:
            write_json(os.path.join(args.out, "eigen.json"), report)
        sys.stdout.write(dumps_json(report))
    else:
        header, rows = run_sweep(scn, args.param, _parse_values(args.values), args.workers)
        path = write_csv(os.path.join(args.out, "sweep.csv"), header, rows)
        print(f"Wrote {path} ({len(rows)} points)")
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args)
    try:
        return run(args)
    except (ConfigError, DimensionMismatch, IndexOutOfRange) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as e:
        print(f"numerical error: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
