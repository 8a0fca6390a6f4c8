import argparse
import logging
import sys
from pathlib import Path
from typing import NoReturn, Sequence

from pydantic import ValidationError

from qcap import __version__
from qcap.cli import commands
from qcap.cli.models import ChannelName, ChannelSpec, Command, OutputFormat, RunConfig
from qcap.core.config import settings
from qcap.core.errors import QcapError
from qcap.utils.files import STDOUT, sibling_path, write_artifact


class ArgumentParser(argparse.ArgumentParser):
    """Usage errors exit with the error code; exit code 2 is reserved for inconclusive results."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(commands.EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _add_channel_arguments(parser: ArgumentParser) -> None:
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--channel", choices=[name.value for name in ChannelName], help="Named channel pair.")
    source.add_argument("--isometry", type=Path, help="JSON isometry document.")
    parser.add_argument("--p", type=float)
    parser.add_argument("--m", type=float)
    parser.add_argument("--s", type=float)
    parser.add_argument("--lambda", dest="lam", type=float)
    parser.add_argument("--complement", action="store_true", help="Swap the direct and complementary channels.")


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="qcap", description="Coherent information and log-singularity certificates for channel pairs.")
    parser.add_argument("--version", action="version", version=f"qcap {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG logging on stderr.")
    subparsers = parser.add_subparsers(dest="command", required=True)

    positivity = subparsers.add_parser(Command.POSITIVITY.value, help="Issue positivity certificates for Q1.")
    _add_channel_arguments(positivity)
    positivity.add_argument("--sigma", help="Perturbation direction: 'mixed', 'basis:K' or a density JSON file.")
    positivity.add_argument("--samples", type=int, default=settings.scan_samples, help="Random witness kets after the structured list.")
    positivity.add_argument("--no-confirm", dest="confirm", action="store_false", help="Skip direct evaluation of positive certificates.")

    qcoh = subparsers.add_parser(Command.QCOH.value, help="Maximize the entropy bias.")
    _add_channel_arguments(qcoh)
    qcoh.add_argument("--restarts", type=int, default=settings.restarts)

    figd = subparsers.add_parser(Command.FIGD.value, help="Non-additivity threshold curve with verification rows.")
    figd.add_argument("--s-min", type=float, default=0.0)
    figd.add_argument("--s-max", type=float, default=0.5)
    figd.add_argument("--s-step", type=float, default=0.025)
    figd.add_argument("--workers", type=int, default=1)

    report = subparsers.add_parser(Command.NONADDITIVITY.value, help="One non-additivity report.")
    report.add_argument("--p", type=float, required=True)
    report.add_argument("--s", type=float, required=True)
    report.add_argument("--no-deep", dest="deep", action="store_false", help="Skip the extended-precision probe.")

    isometry = subparsers.add_parser(Command.ISOMETRY.value, help="Export a channel pair as a JSON isometry document.")
    _add_channel_arguments(isometry)

    for subparser in (positivity, qcoh, figd, report, isometry):
        subparser.add_argument("--seed", type=int, default=settings.seed)
        subparser.add_argument("--output", default="figd.csv" if subparser is figd else STDOUT, help="Output path, '-' for stdout.")
    return parser


def _channel_spec(args: argparse.Namespace) -> ChannelSpec:
    params = {key: getattr(args, key) for key in ("p", "m", "s", "lam") if getattr(args, key) is not None}
    return ChannelSpec(name=args.channel, params=params, isometry_path=args.isometry, complement=args.complement)


def _run_config(args: argparse.Namespace) -> RunConfig:
    skipped = ("command", "output", "verbose")
    parameters = {key: (str(value) if isinstance(value, Path) else value) for key, value in sorted(vars(args).items()) if key not in skipped}
    output_format = OutputFormat.CSV if args.command == Command.FIGD.value else OutputFormat.JSON
    return RunConfig(command=Command(args.command), parameters=parameters, output_path=str(args.output), format=output_format)


def run(args: argparse.Namespace) -> int:
    config = _run_config(args)
    command = Command(args.command)
    if command is Command.POSITIVITY:
        text, code = commands.cmd_positivity(config, _channel_spec(args), args.sigma, seed=args.seed, samples=args.samples, confirm=args.confirm)
        write_artifact(args.output, text)
        return code
    if command is Command.QCOH:
        write_artifact(args.output, commands.cmd_qcoh(config, _channel_spec(args), restarts=args.restarts, seed=args.seed))
    elif command is Command.NONADDITIVITY:
        write_artifact(args.output, commands.cmd_nonadditivity(config, args.p, args.s, deep=args.deep))
    elif command is Command.ISOMETRY:
        write_artifact(args.output, commands.cmd_isometry(config, _channel_spec(args)))
    else:
        curve, verification = commands.cmd_figd(config, args.s_min, args.s_max, args.s_step, workers=args.workers)
        write_artifact(args.output, curve)
        if args.output != STDOUT:
            write_artifact(sibling_path(args.output, "verification"), verification)
        else:
            write_artifact(STDOUT, verification)
    return commands.EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = [logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)]
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        return run(args)
    except (QcapError, ValidationError, ValueError) as e:
        print(f"qcap: error: {e}", file=sys.stderr)
        return commands.EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
