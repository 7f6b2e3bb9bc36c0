import argparse
import json
import logging
import sys
from typing import List, Optional

from app.errors import EquilocError
from app.routers import commands

logger = logging.getLogger(__name__)

VERSION = "1.0.0"


def _engine_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--output", choices=("json", "text"), default="text")
    parser.add_argument("--seed", type=int, default=0, help="seed for generic-point sampling")
    parser.add_argument("--threads", type=int, default=1, help="workers for per-point contributions")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="equiloc",
        description="Exact equivariant localization and Bott residue computations.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {VERSION}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    subparsers = parser.add_subparsers(dest="command", required=True)

    run = subparsers.add_parser("run", help="run a scenario file")
    run.add_argument("file")
    run.add_argument("--check-substitutions", type=int, default=0, metavar="K")
    _engine_options(run)
    run.set_defaults(handler=commands.run_command)

    demo = subparsers.add_parser("demo", help="run a bundled scenario")
    demo.add_argument("name", choices=sorted(commands.DEMOS))
    demo.add_argument("--check-substitutions", type=int, default=0, metavar="K")
    _engine_options(demo)
    demo.set_defaults(handler=commands.demo_command)

    calibrate = subparsers.add_parser(
        "calibrate-schubert", help="list Schubert conventions and the one that passes"
    )
    calibrate.add_argument("n", type=int)
    calibrate.set_defaults(handler=commands.calibrate_command, seed=0, threads=1)
    return parser


def configure_logging(verbosity: int) -> None:
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity > 1:
        level = logging.DEBUG
    logging.basicConfig(
        level=level,
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    try:
        return args.handler(args)
    except EquilocError as e:
        if getattr(args, "output", "text") == "json":
            print(json.dumps(e.detail, sort_keys=True), file=sys.stderr)
        else:
            print(f"error [{e.error_code}]: {e.message}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
