"""Command-line entry point for the Monte Carlo benchmark."""
from __future__ import annotations

import argparse
import logging
import sys

from .core import NumericalError
from .harness import ConfigError, emit_outputs, load_config, run_benchmark


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="utphd-bench",
        description="Monte Carlo benchmark of trajectory PHD/CPHD filters with unknown detection probability.")
    ap.add_argument("--config", help="INI file with [scenario] [filter] [reduction] [metric] [run] sections")
    ap.add_argument("--scenario", help="preset: scenario1, scenario1-pd085, scenario1-pd073, scenario2")
    ap.add_argument("--filters", help="comma list of bgu-tphd, bgu-tcphd, gm-tphd, gm-tcphd")
    ap.add_argument("--lscan", help="L-scan window length, or a comma list for a sweep")
    ap.add_argument("--mc", type=int, help="number of Monte Carlo runs")
    ap.add_argument("--seed", type=int, help="base seed; run i uses seed + i")
    ap.add_argument("--workers", type=int, help="worker processes across runs")
    ap.add_argument("--out", default="results", help="output directory (default: results)")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        overrides = dict(
            scenario=args.scenario,
            filters=None if args.filters is None else tuple(
                f.strip() for f in args.filters.split(",") if f.strip()),
            lscan=None if args.lscan is None else tuple(int(x) for x in args.lscan.split(",")),
            mc=args.mc, seed=args.seed, workers=args.workers)
        cfg = load_config(args.config, **overrides)
        report = run_benchmark(cfg)
        paths = emit_outputs(report, args.out)
    except (ConfigError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except NumericalError as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return 3
    for label in report.labels:
        print(f"{label:24s} average TM {report.average_tm(label):.3f}  "
              f"{report.mean_seconds(label):.2f} s/run")
    for p in paths:
        print(f"wrote {p}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
