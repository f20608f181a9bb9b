"""
Command-line entry point: `python main.py <command> [flags]`.

Exit codes: 0 success, 1 usage error, 2 runtime failure. Logs go to stderr,
stdout carries a single JSON summary line.
"""

import logging
import sys
from typing import List, Optional

from dotenv import load_dotenv

# Load environment variables before settings are read
load_dotenv()

from qmcd.commands import abc, discrepancy, mde, plot, points, simulate, sweep
from qmcd.commands.base import QmcdArgumentParser, common_options, emit_summary
from qmcd.config import settings
from qmcd.errors import QmcdError, UsageError
from qmcd.logging_setup import configure_logging
from qmcd.services.direction_numbers import DirectionNumberTable, init_direction_numbers

logger = logging.getLogger(__name__)

COMMANDS = [points, simulate, discrepancy, sweep, mde, abc, plot]


def build_parser() -> QmcdArgumentParser:
    parser = QmcdArgumentParser(
        prog="qmcd",
        description=(
            "QMC point sets, discrepancies and discrepancy-based inference. "
            "Precedence: flags > --config JSON > defaults. "
            "QMCD_DATA_DIR locates the Sobol direction-number table."
        ),
    )
    subparsers = parser.add_subparsers(dest="command", metavar="command", required=True)
    common = common_options()
    for command in COMMANDS:
        command.register(subparsers, common)
    return parser


def run(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        sys.stderr.write(f"{str(e)}\n")
        return 1
    except SystemExit as e:
        # --help
        return int(e.code or 0)

    level = "DEBUG" if args.verbose else ("WARNING" if args.quiet else None)
    configure_logging(level=level)

    for warning in settings.validate_config():
        if "CRITICAL" in warning:
            logger.error(warning)
        else:
            logger.warning(warning)

    try:
        init_direction_numbers(DirectionNumberTable())
        summary = args.handler(args, argv)
    except UsageError as e:
        logger.error(f"Usage error: {str(e)}")
        return 1
    except (QmcdError, OSError, ValueError) as e:
        logger.error(f"{args.command} failed: {type(e).__name__}: {str(e)}")
        return 2

    emit_summary(summary)
    return 0


if __name__ == "__main__":
    sys.exit(run())
