"""``ietlab`` command-line driver.

Exit codes: 0 success, 2 invalid configuration / arguments / missing
upstream stage, 3 numerical or structural failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

from .errors import (
    BudgetExceeded,
    ConfigError,
    DegenerateStep,
    DomainError,
    InvalidArgument,
    InvalidSuspension,
    SingularEvaluation,
    StageDependencyError,
    StructuralError,
)
from .pipeline import COMMANDS, STAGES, load_config, run_all

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3

log = logging.getLogger("ietlab")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ietlab",
        description="Interval exchange / skew-product experiment pipeline.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in STAGES + ("all",):
        helptext = "run every stage in order" if name == "all" else f"run the {name} stage"
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", required=True, type=Path, help="experiment config (JSON)")
        p.add_argument("--out", type=Path, default=None,
                       help="output directory (default: the config's 'output' field)")
        p.add_argument("--workers", type=int, default=1, help="worker processes")
        p.add_argument("--precision", choices=("double", "dd"), default="double",
                       help="scalar type for induction and tower audits")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config)
        out = args.out if args.out is not None else cfg.get("output")
        if out is None:
            raise ConfigError("no output directory: pass --out or set 'output' in the config")
        if args.workers < 1:
            raise InvalidArgument("--workers must be >= 1")
        t0 = time.perf_counter()
        if args.command == "all":
            result = run_all(cfg, out, args.workers, args.precision)
        else:
            result = COMMANDS[args.command](cfg, out, args.workers, args.precision)
        log.info("%s done in %.1f s", args.command, time.perf_counter() - t0)
        if args.command in ("report", "all"):
            print("\n".join(result["lines"]))
        return EXIT_OK
    except (ConfigError, InvalidArgument, InvalidSuspension, StageDependencyError) as exc:
        print(f"ietlab: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (StructuralError, DegenerateStep, SingularEvaluation, BudgetExceeded, DomainError) as exc:
        print(f"ietlab: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
