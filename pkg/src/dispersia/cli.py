"""Command line interface: ``dispersia run | sweep | check | list``.

Exit status: 0 success, 1 failed check, 2 configuration error (nothing is
written), 3 solver instability (``meta.json`` records the failure time).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import acceptance, templates
from ._version import __version__
from .scenarios import (
    EXIT_CONFIG,
    EXIT_FAILED,
    EXIT_OK,
    ConfigError,
    Scenario,
    output_root,
    parse_values,
    run_scenario,
    sweep,
)

logger = logging.getLogger("dispersia")


def _load(path: str) -> Scenario:
    return Scenario.from_file(path)


def cmd_run(args) -> int:
    try:
        scenario = _load(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    art = run_scenario(scenario, root=args.out)
    if art.status != "ok":
        print(f"{scenario.name}: {art.meta.get('error')} (t = {art.meta.get('failure_time')})", file=sys.stderr)
    print(f"{scenario.name}: {art.status} -> {art.directory}")
    return art.exit_code


def cmd_sweep(args) -> int:
    try:
        scenario = _load(args.config)
        values = parse_values(args.values)
        runs, folder = sweep(scenario, args.axis, values, root=args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for value, art in zip(values, runs):
        print(f"{args.axis} = {value}: {art.status}")
    print(f"summary: {folder / 'summary.csv'}")
    return EXIT_OK if all(a.status == "ok" for a in runs) else EXIT_FAILED


def cmd_check(args) -> int:
    if args.suite not in acceptance.SUITES:
        print(f"unknown suite {args.suite!r}; choose from {', '.join(acceptance.SUITES)}", file=sys.stderr)
        return EXIT_CONFIG
    results = acceptance.run_suite(args.suite)
    path = args.report or (output_root(args.out) / f"check_{args.suite}.json")
    acceptance.write_report(path, args.suite, results)
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed; report: {path}")
    return EXIT_FAILED if failed else EXIT_OK


def cmd_list(args) -> int:
    if args.show:
        try:
            print(json.dumps(templates.template(args.show), indent=2))
        except KeyError as exc:
            print(exc.args[0], file=sys.stderr)
            return EXIT_CONFIG
        return EXIT_OK
    for name, doc in templates.TEMPLATES.items():
        print(f"{name:32s} {doc.get('description', '')}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dispersia", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"dispersia {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one scenario file")
    p.add_argument("config")
    p.add_argument("--out", help="output root (default: $DISPERSIA_OUT or ./dispersia_runs)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run a scenario once per value of a numeric parameter")
    p.add_argument("config")
    p.add_argument("--axis", required=True, help="dotted parameter path, e.g. equation.viscosity or grid.n")
    p.add_argument("--values", required=True, help="comma-separated list")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("check", help="run an acceptance suite")
    p.add_argument("suite", help=", ".join(acceptance.SUITES))
    p.add_argument("--out")
    p.add_argument("--report", type=Path, help="where to write the JSON report")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("list", help="list built-in scenario templates")
    p.add_argument("--show", metavar="NAME", help="print one template as JSON")
    p.set_defaults(func=cmd_list)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
