"""``warpgeo`` command line.

    warpgeo run <scene-file | catalog-name> --suite <name> [--seed N] [--samples N]
                [--fd-h X] [--tol X] [--json] [--diagnostic]
    warpgeo --list-catalog

Exit status: 0 when every identity passes, 1 when one fails, 2 on a bad
scene file or bad arguments.  Records tagged ``diagnostic:`` never affect
the status.
"""
from __future__ import annotations

import argparse
import sys

from .scenespec import SUITES, SpecError, catalog_names, load_catalog, load_spec
from .suites import RunOptions, run_suite

EXIT_OK, EXIT_FAILED, EXIT_SPEC = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_SPEC)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="warpgeo", description="Verify dual-connection identities on warped product scenes.")
    p.add_argument("--list-catalog", action="store_true", help="list built-in scenes and exit")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    run = sub.add_parser("run", help="run a suite on a scene")
    run.add_argument("spec", help="scene file path or built-in catalog name")
    run.add_argument("--suite", choices=SUITES, default=None,
                     help="suite to run (default: the scene's own list, else all)")
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--samples", type=int, default=None, help="sample count for every check")
    run.add_argument("--fd-h", type=float, default=None, help="first-derivative FD step")
    run.add_argument("--tol", type=float, default=None, help="tolerance for every check")
    run.add_argument("--json", action="store_true", help="one JSON record per line")
    run.add_argument("--diagnostic", action="store_true",
                     help="add diagnostic records (alternate readings, flatness hypothesis)")
    return p


def _list_catalog(out) -> int:
    for name in catalog_names():
        spec = load_catalog(name)
        print(f"{name:14s} {spec.description}", file=out)
    return EXIT_OK


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if args.list_catalog:
        return _list_catalog(out)
    if args.command != "run":
        build_parser().print_usage(err)
        return EXIT_SPEC
    if args.samples is not None and args.samples < 1:
        print("warpgeo: error: --samples must be positive", file=err)
        return EXIT_SPEC
    if args.seed is not None and args.seed < 0:
        print("warpgeo: error: --seed must be non-negative", file=err)
        return EXIT_SPEC
    for flag, v in (("--fd-h", args.fd_h), ("--tol", args.tol)):
        if v is not None and not v > 0:
            print(f"warpgeo: error: {flag} must be positive", file=err)
            return EXIT_SPEC
    try:
        spec = load_spec(args.spec)
    except SpecError as e:
        print(f"warpgeo: spec error: {e}", file=err)
        return EXIT_SPEC

    opts = RunOptions.from_spec(spec, seed=args.seed, samples=args.samples, h=args.fd_h, tol=args.tol,
                                diagnostic=args.diagnostic or None)
    suites = (args.suite,) if args.suite else spec.suites
    status = EXIT_OK
    for suite in suites:
        result = run_suite(spec, suite, opts, log=err)
        for r in result.reports:
            print(r.to_json() if args.json else r.summary(), file=out)
        if not result.passed:
            status = EXIT_FAILED
    if not args.json:
        print(f"{spec.name}: {'all identities passed' if status == EXIT_OK else 'FAILED'}", file=out)
    return status


def entry() -> None:
    raise SystemExit(main())
