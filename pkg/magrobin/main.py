"""
magrobin - Command-line Entry Point

One subcommand per module operation plus ``sweep`` and ``fixtures-build``.
Parameters come from ``--config FILE`` (flat ``key = value``) and are
overridden by command-line flags; results land in ``--output``.

Exit codes: 0 success, 2 invalid input, 3 computation failure.
"""

import argparse
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

from dotenv import load_dotenv

from magrobin import __version__
from magrobin.config.settings import get_settings, reset_settings
from magrobin.services.commands import COMMAND_PARAMS, FLAG_ALIASES, read_config_file
from magrobin.services.run_service import EXIT_VALIDATION, RunService
from magrobin.services.sweep_service import SweepService, parse_grid
from magrobin.utils.logger import get_logger, setup_logging
from magrobin.utils.validators import ValidationError

logger = get_logger(__name__)

COMMON = (
    "config",
    "output",
    "seed",
    "workers",
    "log_level",
    "command",
    "grid",
    "set",
    "target",
)


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="flat key = value parameter file")
    parser.add_argument("--output", type=Path, help="output directory")
    parser.add_argument("--seed", type=int, help="seed of the Lanczos start vectors")
    parser.add_argument("--workers", type=int, help="sweep worker processes")
    parser.add_argument(
        "--log-level",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="console log level",
    )


def _add_model_flags(parser: argparse.ArgumentParser, command: str) -> None:
    model = COMMAND_PARAMS[command]
    for name, info in model.model_fields.items():
        flags = [_flag(name), *FLAG_ALIASES.get(name, ())]
        if info.annotation is bool:
            parser.add_argument(
                *flags,
                dest=name,
                action=argparse.BooleanOptionalAction,
                default=argparse.SUPPRESS,
                help=info.description,
            )
        else:
            parser.add_argument(
                *flags, dest=name, default=argparse.SUPPRESS, help=info.description
            )


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="magrobin",
        description="Spectral toolkit for the magnetic Robin Laplacian",
        allow_abbrev=False,
    )
    ap.add_argument("--version", action="version", version=f"magrobin {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    for command, model in COMMAND_PARAMS.items():
        summary = (model.__doc__ or command).strip().splitlines()[0]
        parser = sub.add_parser(command, help=summary, allow_abbrev=False)
        _add_common(parser)
        _add_model_flags(parser, command)

    sweep = sub.add_parser(
        "sweep", help="run a command over a parameter grid", allow_abbrev=False
    )
    targets = [c for c in COMMAND_PARAMS if c != "fixtures-build"]
    sweep.add_argument("target", choices=targets)
    sweep.add_argument(
        "--grid", action="append", default=[], help="key=v1,v2,... (repeatable)"
    )
    sweep.add_argument(
        "--set", action="append", default=[], help="fixed key=value (repeatable)"
    )
    _add_common(sweep)
    return ap


def parse_args(argv: Sequence[str] | None = None) -> argparse.Namespace:
    return build_parser().parse_args(argv)


def _parameters(args: argparse.Namespace) -> dict[str, Any]:
    """Config file values overridden by explicit flags."""
    params: dict[str, Any] = {}
    if args.config is not None:
        params.update(read_config_file(args.config))
    for key in getattr(args, "set", []):
        if "=" not in key:
            raise ValidationError("set", "expected key=value", key)
        name, value = (part.strip() for part in key.split("=", 1))
        params[name.replace("-", "_")] = value
    params.update({k: v for k, v in vars(args).items() if k not in COMMON})
    return params


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the command line; returns the process exit code."""
    load_dotenv()
    reset_settings()
    args = parse_args(argv)
    setup_logging(level=args.log_level)
    settings = get_settings()

    command = args.target if args.command == "sweep" else args.command
    output = args.output or settings.output_dir / command
    seed = settings.seed if args.seed is None else args.seed

    try:
        params = _parameters(args)
    except ValidationError as e:
        logger.error(f"invalid configuration: {e}")
        return EXIT_VALIDATION

    if args.command == "sweep":
        if args.workers is not None and args.workers < 1:
            logger.error("--workers must be at least 1")
            return EXIT_VALIDATION
        try:
            result = SweepService(output, args.workers).run(
                command, params, parse_grid(args.grid), seed
            )
        except ValidationError as e:
            logger.error(f"invalid sweep: {e}")
            return EXIT_VALIDATION
        logger.info(f"sweep written to {output / 'sweep.csv'}")
        return result.exit_code

    record = RunService(output).run(command, params, seed)
    if record.success:
        logger.info(f"results written to {output / 'result.json'}")
    else:
        logger.error(f"{command} failed: {record.error}")
    return record.exit_code


if __name__ == "__main__":
    sys.exit(main())
