"""Command line entry point.

    molab run <config.json> [--out DIR] [--seed N] [--resolution N] [--csv]
    molab check-config <config.json>
    molab gallery

Exit codes: 0 all checks passed, 1 some verification failed, 2 usage or
config error, 3 internal numeric error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .geometry import GALLERY
from .reports import dump_report, write_csv
from .scenarios import FIELD_GALLERY, run_scenario, validate_config

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3


def _load_config(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def cmd_run(args) -> int:
    try:
        config = _load_config(args.config)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.resolution is not None:
        overrides["resolution"] = args.resolution
    try:
        report = run_scenario(config, overrides=overrides)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ArithmeticError, FloatingPointError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    out_dir = args.out or "."
    os.makedirs(out_dir, exist_ok=True)
    out_path = os.path.join(out_dir, "report.json")
    payload = dump_report(report)
    with open(out_path, "wb") as fh:
        fh.write(payload)
    if args.csv or config.get("emit_csv", False):
        for name, tbl in report.get("tables", {}).items():
            write_csv(os.path.join(out_dir, f"{name}.csv"), tbl)
    print(f"{report['status']}: {out_path}")
    return EXIT_PASS if report["status"] == "pass" else EXIT_FAIL


def cmd_check_config(args) -> int:
    try:
        config = _load_config(args.config)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    errors = validate_config(config)
    if errors:
        for e in errors:
            print(f"invalid: {e}", file=sys.stderr)
        return EXIT_USAGE
    print("ok")
    return EXIT_PASS


def cmd_gallery(args) -> int:
    print("domains:")
    for name in sorted(GALLERY):
        print(f"  {name}")
    print("fields:")
    for name in sorted(FIELD_GALLERY):
        spec = FIELD_GALLERY[name]
        print(f"  {name} (n={spec['n']})")
    print("tasks:")
    for name in ["norm", "conditions", "indicator-bounds", "density-scan", "embed", "necessity"]:
        print(f"  {name}")
    return EXIT_PASS


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="molab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario config")
    p_run.add_argument("config")
    p_run.add_argument("--out", default=None, help="output directory (default: cwd)")
    p_run.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_run.add_argument("--resolution", type=int, default=None, help="override the grid resolution")
    p_run.add_argument("--csv", action="store_true", help="also write tables as CSV")
    p_run.set_defaults(fn=cmd_run)

    p_check = sub.add_parser("check-config", help="validate a config against the schema")
    p_check.add_argument("config")
    p_check.set_defaults(fn=cmd_check_config)

    p_gal = sub.add_parser("gallery", help="list built-in domains, fields and tasks")
    p_gal.set_defaults(fn=cmd_gallery)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
