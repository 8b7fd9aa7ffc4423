"""Command-line entry point: ``fjdyn <command> [options]``.

Exit codes: 0 success, 1 invalid input or usage, 2 numerical or internal
failure, 3 a verification suite found a disagreement.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from . import scenario as sio
from . import suites
from .errors import FJError, NetworkError, GainOutOfRange, ScenarioError

EXIT_OK, EXIT_INPUT, EXIT_INTERNAL, EXIT_DISAGREE = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with code 1 instead of argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _common() -> argparse.ArgumentParser:
    p = _Parser(add_help=False)
    p.add_argument("--tol", type=float, help="single-issue step tolerance")
    p.add_argument("--max-iter", type=int, help="single-issue iteration budget")
    p.add_argument("--max-issues", type=int, help="issue budget for sequences")
    p.add_argument("--out", metavar="PATH", help="trajectory CSV destination")
    p.add_argument("--report", metavar="PATH", help="JSON report destination (default: stdout)")
    p.add_argument("--record-full", action="store_true", help="keep every state, not just first and last")
    return p


def _seed_range(text: str) -> range:
    try:
        a, b = text.split("..")
        lo, hi = int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected A..B, got {text!r}") from None
    if lo < 0 or hi < lo:
        raise argparse.ArgumentTypeError(f"need 0 <= A <= B, got {text!r}")
    return range(lo, hi + 1)


def _suite_list(text: str) -> list:
    names = [t.strip() for t in text.split(",") if t.strip()]
    unknown = [t for t in names if t not in suites.SUITES]
    if unknown or not names:
        raise argparse.ArgumentTypeError(
            f"unknown suite(s) {unknown}; choose from {', '.join(suites.SUITES)}")
    return names


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="fjdyn", description="Friedkin-Johnsen opinion dynamics over issue sequences.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, text in [
        ("analyze", "check every assumption and verdict for a scenario"),
        ("simulate", "run one issue of the dynamics"),
        ("sequence", "run an issue sequence"),
        ("bounded", "run an issue sequence under bounded confidence"),
    ]:
        sp = sub.add_parser(name, parents=[common], help=text)
        sp.add_argument("scenario", help="scenario JSON file")
    vp = sub.add_parser("verify", parents=[common], help="run the randomised oracle suites")
    vp.add_argument("--suites", type=_suite_list, default=list(suites.SUITES),
                    help="comma-separated suite names (default: all)")
    vp.add_argument("--seeds", type=_seed_range, default=None,
                    help="inclusive seed range A..B (default: per-suite acceptance counts)")
    return parser


def _emit(report: dict, path):
    if path:
        sio.write_report(report, path)
    else:
        sys.stdout.write(sio.dumps_report(report))


def _run(args) -> int:
    if args.command == "verify":
        results = suites.run_suites(args.suites, args.seeds)
        report = {"suites": [r.to_dict() for r in results],
                  "ok": all(r.ok for r in results)}
        _emit(report, args.report)
        for r in results:
            status = "ok" if r.ok else f"{len(r.disagreements)} disagreement(s)"
            print(f"{r.name}: {r.cases} cases, {status}", file=sys.stderr)
        return EXIT_OK if report["ok"] else EXIT_DISAGREE

    sc = sio.load_scenario(args.scenario).with_overrides(args.tol, args.max_iter, args.max_issues)
    if args.command == "analyze":
        _emit(sio.analyze(sc), args.report)
        return EXIT_OK

    mode = {"simulate": "single", "sequence": "sequence", "bounded": "bounded"}[args.command]
    if mode == "bounded" and sc.confidence is None:
        raise ScenarioError("confidence", "required for the bounded command")
    result = sio.run_scenario(replace(sc, mode=mode), record_full=args.record_full)
    if args.out:
        sio.write_trajectory(result, args.out, n=sc.network.n)
    _emit(sio.run_summary(result), args.report)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _run(args)
    except (ScenarioError, NetworkError, GainOutOfRange) as exc:
        print(f"fjdyn: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (FJError, OSError, ArithmeticError) as exc:
        print(f"fjdyn: failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # anything else is a bug; still honour the exit-code contract
        print(f"fjdyn: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def run_cli(argv) -> int:
    """Like :func:`main` but returns the exit code for argparse exits too."""
    try:
        return main(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
