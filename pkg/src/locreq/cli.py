"""Command-line entry point.

    locreq derive|check|tabulate|simulate --config <path>
           [--format json|csv|markdown] [--out <path>] [--seed <u64>] [--trials <n>]

The report goes to stdout (or ``--out``); diagnostics go to stderr.
Exit codes: 0 success/feasible, 1 usage or config error, 2 infeasible or
unsuitable, 3 simulation bound violated.
"""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .commands import (
    EXIT_INFEASIBLE,
    EXIT_OK,
    EXIT_USAGE,
    cmd_check,
    cmd_derive,
    cmd_simulate,
    cmd_tabulate,
)
from .config import load_config
from .errors import ConfigError, ConfidenceMismatchError, LocreqError, MissingRepeatabilityError
from .report import FORMATS, render_report


def _u64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("trials must be >= 1")
    return v


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="locreq", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"locreq {__version__}")
    parser.add_argument("command", choices=("derive", "check", "tabulate", "simulate"))
    parser.add_argument("--config", required=True, help="project configuration (JSON)")
    parser.add_argument("--format", choices=FORMATS, default="json")
    parser.add_argument("--out", help="write the report here instead of stdout")
    parser.add_argument("--seed", type=_u64, help="override simulation.seed")
    parser.add_argument("--trials", type=_positive, help="override simulation.trials")
    return parser


def run(args: argparse.Namespace) -> tuple[bytes, int]:
    cfg = load_config(args.config).with_overrides(seed=args.seed, trials=args.trials)
    if args.command == "derive":
        return render_report(cmd_derive(cfg), args.format), EXIT_OK
    if args.command == "tabulate":
        return render_report(cmd_tabulate(cfg), args.format), EXIT_OK
    if args.command == "check":
        report, code = cmd_check(cfg)
    else:
        report, code = cmd_simulate(cfg)
    return render_report(report, args.format), code


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        payload, code = run(args)
    except (ConfigError, ConfidenceMismatchError, MissingRepeatabilityError) as err:
        print(f"locreq: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except LocreqError as err:
        print(f"locreq: infeasible: {err}", file=sys.stderr)
        return EXIT_INFEASIBLE
    if args.out:
        try:
            with open(args.out, "wb") as fh:
                fh.write(payload)
        except OSError as err:
            print(f"locreq: error: cannot write {args.out}: {err.strerror}", file=sys.stderr)
            return EXIT_USAGE
    elif hasattr(sys.stdout, "buffer"):
        sys.stdout.buffer.write(payload)
        sys.stdout.flush()
    else:
        sys.stdout.write(payload.decode("utf-8"))
    return code


if __name__ == "__main__":
    sys.exit(main())
