"""``rothe-py`` command line.

Usage::

    rothe-py run <config> [--out DIR] [--quiet]
    rothe-py validate <config>

Exit codes: 0 success, 1 config, 2 geometry, 3 solver or numeric failure,
4 coercivity violation.  ``ROTHE_THREADS`` caps sweep parallelism.
"""
from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional, Sequence

from . import __version__
from .api import run_path, validate_path
from .errors import (
    CoercivityError,
    ConfigError,
    ConvergenceError,
    GeometryError,
    IneligibleFunctionalError,
    NumericError,
)

_LOGGER = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_GEOMETRY = 2
EXIT_SOLVER = 3
EXIT_COERCIVITY = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rothe-py",
        description="Rothe time stepping for bidomain problems with dynamic transmission conditions.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="run the experiment of a config file and write its CSV tables")
    run.add_argument("config", help="path to the TOML config")
    run.add_argument("--out", default=None, help="output directory (overrides [output] dir)")
    run.add_argument("--quiet", action="store_true", help="only log warnings and errors")

    validate = commands.add_parser("validate", help="check a config file and report every issue")
    validate.add_argument("config", help="path to the TOML config")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    quiet = getattr(args, "quiet", False)
    logging.basicConfig(
        level=logging.WARNING if quiet else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    try:
        if args.command == "validate":
            config = validate_path(args.config)
            print(f"{args.config}: valid {config.experiment.kind} config")
            return EXIT_OK
        result = run_path(args.config, args.out)
    except ConfigError as exc:
        for issue in exc.issues:
            print(f"{args.config}: {issue}", file=sys.stderr)
        return EXIT_CONFIG
    except (FileNotFoundError, IneligibleFunctionalError) as exc:
        _LOGGER.error("%s", exc)
        return EXIT_CONFIG
    except CoercivityError as exc:
        _LOGGER.error("%s", exc)
        return EXIT_COERCIVITY
    except GeometryError as exc:
        _LOGGER.error("%s", exc)
        return EXIT_GEOMETRY
    except (ConvergenceError, NumericError) as exc:
        _LOGGER.error("%s", exc)
        return EXIT_SOLVER

    for key, value in result.summary.items():
        _LOGGER.info("%s: %s", key, value)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
