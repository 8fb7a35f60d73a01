"""Command-line entry point.

Exit codes are 0 if every check passes, 1 if a check fails or a simulation or sampler fails, and 2 for an invalid
configuration or an unwritable output directory.
"""

import argparse
import dataclasses
import logging
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import socdyn.exc as exc
from socdyn.config import configure_logging
from socdyn.experiments import ExperimentConfig, ExperimentKind, ExperimentResult, load_config, run_experiment

log = logging.getLogger(__name__)

EXIT_PASSED = 0
EXIT_FAILED = 1
EXIT_INVALID = 2

_DIAGRAM = (ExperimentKind.ARROW_A1, ExperimentKind.ARROW_A2, ExperimentKind.ARROW_A3, ExperimentKind.ARROW_A4)


def _particle_counts(text: str) -> Tuple[int, ...]:
    try:
        counts = tuple(int(v) for v in text.split(',') if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f'"{text}" is not a comma-separated list of integers.') from None
    if not counts:
        raise argparse.ArgumentTypeError('At least one number of particles is required.')
    return counts


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='socdyn', description='Simulate the self-organized criticality dynamics '
                                                                'and check its convergence diagram.')
    commands = parser.add_subparsers(dest='command', required=True)

    run = commands.add_parser('run', help='Run the experiment of a configuration file.')
    run.add_argument('config', type=Path, help='Flat key-value configuration file.')
    run.add_argument('--workers', type=int, help='Override the number of worker processes.')

    verify = commands.add_parser('verify-generators', help='Run the generator suite.')
    verify.add_argument('--n', type=_particle_counts, default=(2, 10, 100), help='Comma-separated particle counts.')
    verify.add_argument('--sigma-sq', type=float, default=1.)
    verify.add_argument('--seed', type=int, default=0)
    verify.add_argument('--out', type=Path, default=Path('socdyn-out/generator_suite'))

    diagram = commands.add_parser('diagram', help='Run the four arrows of the convergence diagram.')
    diagram.add_argument('--sigma-sq', type=float, required=True)
    diagram.add_argument('--out', type=Path, required=True, help='Parent directory of one directory per arrow.')
    diagram.add_argument('--seed', type=int, default=0)
    diagram.add_argument('--workers', type=int, default=1)
    return parser


def _configs(args: argparse.Namespace) -> List[ExperimentConfig]:
    if args.command == 'run':
        cfg = load_config(args.config)
        if args.workers is not None:
            cfg = dataclasses.replace(cfg, workers=args.workers)
        return [cfg]
    if args.command == 'verify-generators':
        return [ExperimentConfig(ExperimentKind.GENERATOR_SUITE, sigma_sq=args.sigma_sq, n=args.n, seed=args.seed,
                                 out_dir=args.out)]
    return [ExperimentConfig(kind, sigma_sq=args.sigma_sq, seed=args.seed, workers=args.workers,
                             out_dir=args.out / kind.value) for kind in _DIAGRAM]


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    configure_logging()
    results: List[ExperimentResult] = []
    try:
        for cfg in _configs(args):
            results.append(run_experiment(cfg))
    except (exc.ConfigError, exc.OutputError):
        return EXIT_INVALID
    except (exc.SimulationError, exc.SamplerError):
        return EXIT_FAILED
    for result in results:
        print(f'{result.experiment.value}: {"pass" if result.passed else "FAIL"} ({result.report_path})')
    return EXIT_PASSED if all(r.passed for r in results) else EXIT_FAILED
