"""``conflict-lens`` command line.

Exit status: 0 on success, 2 for invalid input or configuration, 1 for
anything else.  Errors are reported as one ``error: <Kind>: <message>`` line
on stderr.
"""
from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional, Sequence

from . import __version__
from .errors import ConflictLensError
from .pipeline import (
    cmd_compare,
    cmd_conflict,
    cmd_predict,
    cmd_profile,
    cmd_reproduce,
    cmd_simulate,
    parse_floats,
)
from .sim import load_scenario


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="conflict-lens",
        description="Profile control apps, score their conflicts and predict concurrent RAN state.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run the RAN simulator and write profiles and traces")
    p.add_argument("--config", help="scenario JSON (defaults built in)")
    p.add_argument("--agents", help="agents JSON (default: ES and TM every 1 s)")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=_seed)
    p.add_argument("--label", help="name of the concurrent ground-truth profile")
    p.add_argument("--concurrent", action="store_true",
                   help="run all agents together instead of one at a time")

    p = sub.add_parser("profile", help="write one ECDF TSV per variable and slice")
    p.add_argument("profiles", nargs="+")
    p.add_argument("--out", required=True)

    p = sub.add_parser("conflict", help="pairwise conflict report and severity index")
    p.add_argument("profile_a")
    p.add_argument("profile_b")
    p.add_argument("--kpm-keys", help="CSV of variable[:slice] averaged into the severity index")
    p.add_argument("--out", required=True)
    p.add_argument("--label")

    p = sub.add_parser("predict", help="weighted ECDF average of individual profiles")
    p.add_argument("profiles", nargs="+")
    p.add_argument("--periods", required=True, help="CSV of message periods in seconds")
    p.add_argument("--offsets", help="CSV of phase offsets in seconds")
    p.add_argument("--holds", help="CSV of per-cycle hold durations in seconds")
    p.add_argument("--measured", help="concurrent profile to score the prediction against")
    p.add_argument("--out", required=True)
    p.add_argument("--label")

    p = sub.add_parser("compare", help="K-S and INT distances between two ECDFs or profiles")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--out", required=True)
    p.add_argument("--label")

    p = sub.add_parser("reproduce", help="run the three timing configurations end to end")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=_seed)
    p.add_argument("--config", help="scenario JSON overriding the defaults")
    return parser


def run(args: argparse.Namespace) -> int:
    if args.command == "simulate":
        m = cmd_simulate(args.out, args.config, args.agents, args.concurrent, args.seed, args.label)
    elif args.command == "profile":
        m = cmd_profile(args.profiles, args.out)
    elif args.command == "conflict":
        m, sigma = cmd_conflict(args.profile_a, args.profile_b, args.out, args.kpm_keys, args.label)
        print(f"{sigma:.4f}")
    elif args.command == "predict":
        periods = parse_floats(args.periods)
        m, report = cmd_predict(
            args.profiles, periods, args.out, parse_floats(args.offsets),
            parse_floats(args.holds), args.measured, args.label,
        )
        for (var, s), pair in (report.comparison or {}).items():
            print(f"{var}\t{s}\t{pair.ks:.4f}\t{pair.integral:.4f}")
    elif args.command == "compare":
        m, rows = cmd_compare(args.a, args.b, args.out, args.label)
        for row in rows:
            print(f"{row['variable'] or '-'}\t{row['slice'] or '-'}\t{row['ks']:.4f}\t{row['int']:.4f}")
    else:
        config = load_scenario(args.config) if args.config else None
        m, rows = cmd_reproduce(args.out, args.seed, config)
        for row in rows:
            print(f"{row['config']}\t{row['variable']}\t{row['ks']:.4f}\t{row['int']:.4f}")
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return run(args)
    except (ConflictLensError, ValueError, KeyError, FileNotFoundError) as exc:
        msg = exc.args[0] if exc.args else str(exc)
        print(f"error: {type(exc).__name__}: {msg}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - top-level guard
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
