"""Command line entry point.

    qthermo fig1 [--config cfg.json] [--t-end T] [--dt DT] [--out DIR] [--seed S] [--jobs N]

Subcommands: fig1, cp-check, bounds, witness, sigma-map, nonmarkov, sweep.
The verdict JSON goes to stdout; the exit code is 0 on PASS, 2 on FAIL and
1 on any error.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import io as qio
from .errors import QThermoError
from .experiments import EXPERIMENTS, ExperimentConfig, run, run_sweep

EXIT_PASS, EXIT_ERROR, EXIT_FAIL = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qthermo", description="Entropy production experiments for open quantum systems.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS + ("sweep",):
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--t-end", type=float)
        p.add_argument("--dt", type=float)
        p.add_argument("--out", help="output root (default: $QTHERMO_OUT_DIR or ./qthermo_out)")
        p.add_argument("--seed", type=int)
        p.add_argument("--jobs", type=int)
    return parser


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise QThermoError("config must be a JSON object")
    return data


def _overrides(args) -> dict:
    keys = {"t_end": args.t_end, "dt": args.dt, "out": args.out, "seed": args.seed, "jobs": args.jobs}
    return {k: v for k, v in keys.items() if v is not None}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        data = _load_config(args.config)
        data.update(_overrides(args))
        if args.command == "sweep":
            data.pop("experiment", None)
            data.pop("params", None)
            verdict = run_sweep(**data)
        else:
            if data.get("experiment", args.command) != args.command:
                raise QThermoError(f"config is for {data['experiment']!r}, not {args.command!r}")
            data["experiment"] = args.command
            verdict = run(ExperimentConfig.from_dict(data))
    except (QThermoError, OSError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    sys.stdout.write(qio.dumps(verdict))
    return EXIT_PASS if verdict["pass"] else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
