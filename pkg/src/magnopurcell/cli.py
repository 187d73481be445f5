"""Command-line entry point for magnopurcell."""

from __future__ import annotations

import argparse
import logging
import sys

from magnopurcell.core.config import RunConfig, load_config, read_bundled_config
from magnopurcell.core.errors import (
    CommandResult,
    CommandStatus,
    ConfigError,
    command_error_handler,
)
from magnopurcell.io.commands import COMMANDS

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    source = common.add_mutually_exclusive_group()
    source.add_argument("--config", default=None, metavar="PATH", help="YAML run configuration")
    source.add_argument(
        "--bundled",
        default=None,
        metavar="NAME",
        help="Use a config shipped with the package (table1, fig5, example)",
    )
    common.add_argument(
        "--output-dir",
        default=None,
        metavar="DIR",
        help="Directory for output files (overrides config and MAGNOPURCELL_OUTPUT_DIR)",
    )

    parser = argparse.ArgumentParser(
        prog="magnopurcell",
        description="Photon-magnon hybrid model: spectra, eigenmodes and Purcell-regime analysis",
    )
    parser.add_argument("--logging", action="store_true", default=None, help="Enable logging")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text, description=help_text)
    return parser


def _load(args: argparse.Namespace) -> tuple[RunConfig, str | None]:
    if args.bundled:
        try:
            return read_bundled_config(args.bundled), None
        except ConfigError as e:
            return RunConfig(), str(e)
    return load_config(args.config)


def _context(config: RunConfig) -> str:
    s = config.system
    return (
        f"cavity={s.cavity_ghz:g} GHz, magnon={s.magnon_ghz:g} GHz, "
        f"alpha={s.alpha:g}, beta={s.beta:g}, g={s.g_mhz:g} MHz"
    )


def main(argv: list[str] | None = None) -> int:
    """Main entry point for the magnopurcell command."""
    args = build_parser().parse_args(argv)

    if args.logging:
        logging.basicConfig(
            level=logging.INFO,
            format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
            stream=sys.stderr,
        )
        logging.getLogger("magnopurcell").setLevel(logging.DEBUG)

    config, config_error = _load(args)
    if config_error:
        print(f"{args.command}: configuration error: {config_error}", file=sys.stderr)
        return CommandStatus.CONFIG_ERROR.exit_code

    command, _ = COMMANDS[args.command]
    result = CommandResult(args.command)
    with command_error_handler(
        result, _context(config), on_error=lambda msg: print(msg, file=sys.stderr)
    ):
        out_dir = config.output_dir(args.output_dir)
        result.outputs = [str(p) for p in command(config, out_dir)]
        result.status = CommandStatus.SUCCESS
        logger.info("%s wrote %d file(s) to %s", args.command, len(result.outputs), out_dir)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
