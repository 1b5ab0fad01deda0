"""``cf-alloc`` command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 numerical/runtime failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .config import ExperimentSpec
from .errors import CfAllocError, ConfigError, IoFailure
from .harness import run_sweep
from .oracles import FIXTURES, run_fixture

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _load(path: str, seed=None, trials=None, out=None) -> ExperimentSpec:
    spec = ExperimentSpec.load(path)
    net = {}
    if seed is not None:
        net["seed"] = seed
    if trials is not None:
        net["trials"] = trials
    if net:
        spec = spec.replace(config=spec.config.replace(**net))
    if out is not None:
        spec = spec.replace(output_path=out)
    return spec


def cmd_run(args) -> int:
    spec = _load(args.config, args.seed, args.trials, args.out)
    result = run_sweep(spec, jobs=args.jobs)
    result.write_csv(spec.output_path, timestamp=not args.no_timestamp)
    print(f"wrote {len(result.rows)} rows to {spec.output_path}")
    return EXIT_OK


def cmd_validate(args) -> int:
    spec = _load(args.config)
    print(json.dumps(spec.to_dict(), indent=2))
    return EXIT_OK


def cmd_oracle(args) -> int:
    reports = run_fixture(args.fixture)
    for r in reports:
        print(r.line())
    return EXIT_OK if all(r.passed for r in reports) else EXIT_RUNTIME


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cf-alloc", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a Monte-Carlo sweep and write CSV")
    run.add_argument("--config", required=True)
    run.add_argument("--out", help="output CSV path (overrides output_path)")
    run.add_argument("--seed", type=int)
    run.add_argument("--trials", type=int)
    run.add_argument("--no-timestamp", action="store_true", help="omit the timestamp comment line")
    run.add_argument("--jobs", type=int, default=1, help="worker processes for trials")
    run.set_defaults(func=cmd_run)

    val = sub.add_parser("validate", help="check a config and print the resolved spec")
    val.add_argument("--config", required=True)
    val.set_defaults(func=cmd_validate)

    ora = sub.add_parser("oracle", help="run small-instance oracle checks")
    ora.add_argument("--fixture", required=True, choices=sorted(FIXTURES) + ["all"])
    ora.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IoFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except CfAllocError as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
