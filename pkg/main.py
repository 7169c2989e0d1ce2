import argparse
import logging
import os
import sys

# Ensure proper path for imports
sys.path.insert(0, os.path.dirname(__file__))

from src.commands import run_command
from src.commands.check import run_check
from src.commands.example import EXAMPLES, run_example
from src.commands.generator import run_generator
from src.commands.lemma import LEMMAS, run_lemma
from src.config import VERSION, settings
from src.models.scenario import scenario_from_args
from src.services.reporting.report_manager import FORMATS


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='scenario file (JSON)')
    common.add_argument('--out', help='output directory (overrides the scenario)')
    common.add_argument('--seed', type=int, help='sampling seed (overrides the scenario)')
    common.add_argument('--tolerance', type=float, help='inequality tolerance (overrides the scenario)')
    common.add_argument('--format', choices=FORMATS, help='report format')

    parser = argparse.ArgumentParser(prog='semigroup-lab',
                                     description='Numerical laboratory for semigroups of self-maps')
    parser.add_argument('--version', action='version', version=f"%(prog)s {VERSION}")
    commands = parser.add_subparsers(dest='command', required=True)
    commands.add_parser('check', parents=[common], help='modulus checks on a family')
    commands.add_parser('generator', parents=[common], help='certified generator extraction')
    lemma = commands.add_parser('lemma', parents=[common], help='inequality verifiers')
    lemma.add_argument('which', choices=LEMMAS)
    example = commands.add_parser('example', parents=[common], help='worked examples')
    example.add_argument('name', choices=EXAMPLES)
    return parser


def _execute(args: argparse.Namespace) -> int:
    overrides = {'seed': args.seed, 'tolerance': args.tolerance, 'out': args.out, 'format': args.format}
    config = scenario_from_args(args.config, overrides)
    if args.command == 'check':
        return run_check(config)
    if args.command == 'generator':
        return run_generator(config)
    if args.command == 'lemma':
        return run_lemma(config, args.which)
    return run_example(config, args.name)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=settings.log_level.upper(), stream=sys.stderr,
                        format='%(asctime)s %(levelname)s %(name)s: %(message)s')
    return run_command(_execute, args)


if __name__ == '__main__':
    sys.exit(main())
