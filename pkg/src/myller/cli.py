"""Command line entry point.

    myller run SCENARIO.json [SCENARIO.json ...] [--step H] [--tol-abs A] [--tol-rel R]
    myller classify TRAJECTORY.csv --frame darboux --kinds xi,mu,v

Exit status: 0 success, 1 invalid input, 2 runtime failure.
"""
from __future__ import annotations

import argparse
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor

from .helix import ConstancyPolicy
from .io import TrajectoryFormatError
from .model import FRAME_KINDS, HELIX_KINDS
from .runner import (EXIT_INVALID, EXIT_OK, EXIT_RUNTIME, RunError, ScenarioError,
                     classify_trajectory, format_report, run_file)


def _policy(args):
    defaults = ConstancyPolicy()
    return ConstancyPolicy(
        abs_tol=args.tol_abs if args.tol_abs is not None else defaults.abs_tol,
        rel_tol=args.tol_rel if args.tol_rel is not None else defaults.rel_tol)


def _threads(n):
    env = os.environ.get("MYLLER_THREADS")
    cap = os.cpu_count() or 1
    if env:
        try:
            cap = max(1, int(env))
        except ValueError:
            print(f"ignoring MYLLER_THREADS={env!r}", file=sys.stderr)
    return max(1, min(n, cap))


def cmd_run(args) -> int:
    policy = _policy(args)
    with ThreadPoolExecutor(max_workers=_threads(len(args.scenarios))) as pool:
        results = list(pool.map(lambda p: run_file(p, args.step, policy), args.scenarios))
    code = EXIT_OK
    for res in results:
        if res.exit_code == EXIT_OK:
            sys.stdout.write(format_report(res.report, timestamp=not args.no_header))
        else:
            for err in res.errors:
                print(f"{res.name}: {err}", file=sys.stderr)
        code = max(code, res.exit_code)
    sys.stdout.flush()
    return code


def cmd_classify(args) -> int:
    kinds = [k.strip() for k in args.kinds.split(",") if k.strip()]
    unknown = [k for k in kinds if k not in HELIX_KINDS]
    if unknown:
        print(f"unknown kinds: {unknown}", file=sys.stderr)
        return EXIT_INVALID
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            report = classify_trajectory(args.trajectory, args.frame, kinds, _policy(args))
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
    except (ScenarioError, TrajectoryFormatError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except RunError as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"I/O failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    sys.stdout.write(format_report(report, timestamp=not args.no_header))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="myller",
        description="Reconstruct Myller configurations from invariants and test for helices.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--tol-abs", type=float, default=None,
                       help="absolute tolerance of the constancy test")
        p.add_argument("--tol-rel", type=float, default=None,
                       help="relative tolerance of the constancy test")
        p.add_argument("--no-header", action="store_true",
                       help="omit the timestamped header line of reports")

    p_run = sub.add_parser("run", help="run scenario files")
    p_run.add_argument("scenarios", nargs="+")
    p_run.add_argument("--step", type=float, default=None,
                       help="override the scenario grid step")
    common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_cls = sub.add_parser("classify", help="classify a trajectory file")
    p_cls.add_argument("trajectory")
    p_cls.add_argument("--frame", choices=FRAME_KINDS, default="darboux")
    p_cls.add_argument("--kinds", default="xi,mu,v")
    common(p_cls)
    p_cls.set_defaults(func=cmd_classify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "tol_abs", None) is not None and args.tol_abs <= 0 or \
            getattr(args, "tol_rel", None) is not None and args.tol_rel <= 0:
        print("tolerances must be positive", file=sys.stderr)
        return EXIT_INVALID
    if getattr(args, "step", None) is not None and args.step <= 0:
        print("step must be positive", file=sys.stderr)
        return EXIT_INVALID
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
