"""Command line interface: `camix scenario|landscape|mip|speller`."""
import argparse
import logging
import sys
import numpy as np
from dataclasses import fields
from .estimators import FitConfig
from .experiments import LandscapeSetup, MipSetup, landscape, mip_experiment
from .input.json import dump_to_json
from .input.pandas import dump_df, dump_report, dump_table
from .scenarios import SCENARIO_IDS, DEFAULT_NE_GRID, ScenarioSpec, run_scenario
from .speller import SPELLER_ALGORITHMS, DEFAULT_WORDS, SpellerConfig, run_speller
from .version import __version__

logger = logging.getLogger(__name__)


def _csv_floats(text):
    try:
        return tuple(float(v) for v in text.split(',') if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"'{text}' is not a comma separated list of numbers.") from None


def _csv_strings(text):
    return tuple(v.strip() for v in text.split(',') if v.strip())


def _add_dataclass_options(parser, cls, skip=()):
    """One --option per field of a dataclass with numeric or boolean defaults."""
    for f in fields(cls):
        if f.name in skip:
            continue
        flag = '--' + f.name.replace('_', '-')
        if isinstance(f.default, bool):
            parser.add_argument(flag, dest=f.name, action=argparse.BooleanOptionalAction, default=f.default)
        elif isinstance(f.default, (int, float)):
            parser.add_argument(flag, dest=f.name, type=type(f.default), default=f.default)


def _from_args(cls, args, skip=()):
    return cls(**{f.name: getattr(args, f.name) for f in fields(cls) if f.name not in skip and hasattr(args, f.name)})


def _fit_config(args):
    return FitConfig(tol=args.tol, max_iter=args.max_iter, m_step_regularization=args.ridge)


def build_parser():
    parser = argparse.ArgumentParser(prog='camix', description='Context-aware estimation of finite mixture models.')
    parser.add_argument('--version', action='version', version=f'camix {__version__}')
    parser.add_argument('-v', '--verbose', action='store_true', help='log at DEBUG level')
    sub = parser.add_subparsers(dest='command', required=True)

    sc = sub.add_parser('scenario', help='Monte Carlo comparison of the estimators')
    sc.add_argument('--id', required=True, choices=SCENARIO_IDS)
    sc.add_argument('--problems', type=int, default=1000)
    sc.add_argument('--ne-grid', type=_csv_floats, default=DEFAULT_NE_GRID)
    sc.add_argument('--algorithms', type=_csv_strings, default=('US', 'S', 'CA', 'WCA', 'DCA'))
    sc.add_argument('--wrong-frac', type=float, default=0.5)
    sc.add_argument('--pi1', type=float, default=0.2)
    sc.add_argument('--mixed-range', type=_csv_floats, default=(0.0, 0.5))
    sc.add_argument('--kl-direction', choices=('forward', 'reverse'), default='forward')
    sc.add_argument('--ikl-direction', choices=('forward', 'reverse'), default='forward')
    sc.add_argument('--seed', type=int, default=0)
    sc.add_argument('--out', required=True)
    sc.add_argument('--format', choices=('csv', 'json'), default='csv')
    sc.add_argument('--tol', type=float, default=1e-5)
    sc.add_argument('--max-iter', type=int, default=300)
    sc.add_argument('--ridge', type=float, default=1e-8)

    la = sub.add_parser('landscape', help='log-likelihood and lower bound curves over the free mean')
    _add_dataclass_options(la, LandscapeSetup)
    la.add_argument('--ne-set', type=_csv_floats, default=(0.7,))
    la.add_argument('--grid-points', type=int, default=400)
    la.add_argument('--out', required=True)
    la.add_argument('--format', choices=('csv', 'json'), default='csv')

    mi = sub.add_parser('mip', help='standard errors and convergence rates over the context information')
    _add_dataclass_options(mi, MipSetup)
    mi.add_argument('--reps', type=int, default=100)
    mi.add_argument('--n', type=int, default=10 ** 4)
    mi.add_argument('--ne-grid', type=_csv_floats, default=DEFAULT_NE_GRID)
    mi.add_argument('--seed', type=int, default=0)
    mi.add_argument('--out', required=True)
    mi.add_argument('--format', choices=('csv', 'json'), default='csv')

    sp = sub.add_parser('speller', help='closed-loop tree speller simulation')
    sp.add_argument('--words', type=_csv_strings, default=DEFAULT_WORDS)
    sp.add_argument('--algorithms', type=_csv_strings, default=SPELLER_ALGORITHMS)
    sp.add_argument('--drift', choices=('none', 'slow', 'jump'), default='slow')
    sp.add_argument('--subjects', type=int, default=12)
    sp.add_argument('--seed', type=int, default=0)
    sp.add_argument('--out', required=True)
    _add_dataclass_options(sp, SpellerConfig)
    return parser


def _run_scenario(args):
    spec = ScenarioSpec(args.id, problems=args.problems, ne_grid=args.ne_grid, master_seed=args.seed,
                        algorithms=args.algorithms, wrong_frac=args.wrong_frac, pi1=args.pi1,
                        mixed_range=tuple(args.mixed_range), kl_direction=args.kl_direction,
                        ikl_direction=args.ikl_direction)
    report = run_scenario(spec, _fit_config(args))
    if args.format == 'json':
        written = [dump_to_json([report.rows, report.aggregates, report.significance], args.out, gz=False,
                                description=f'scenario {spec.id}, seed {spec.master_seed}')]
    else:
        written = dump_report(report, args.out)
    return written


def _run_landscape(args):
    setup = _from_args(LandscapeSetup, args)
    curves = landscape(setup, grid=np.linspace(-3, 4, args.grid_points), ne_set=args.ne_set)
    return [dump_table(curves, args.out, fmt=args.format)]


def _run_mip(args):
    table = mip_experiment(reps=args.reps, n=args.n, ne_grid=args.ne_grid, seed=args.seed,
                           setup=_from_args(MipSetup, args))
    return [dump_table(table, args.out, fmt=args.format)]


def _run_speller(args):
    config = _from_args(SpellerConfig, args)
    trace, summary = run_speller(subjects=args.subjects, words=args.words, algorithms=args.algorithms,
                                 drift=args.drift, seed=args.seed, config=config)
    out = args.out[:-len('.csv')] if args.out.endswith('.csv') else args.out
    return [dump_df(trace, out + '.csv'), dump_df(summary, out + '.summary.csv')]


COMMANDS = {'scenario': _run_scenario, 'landscape': _run_landscape, 'mip': _run_mip, 'speller': _run_speller}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format='%(asctime)s %(levelname)s %(name)s: %(message)s', datefmt='%Y-%m-%d %H:%M:%S')
    try:
        written = COMMANDS[args.command](args)
    except ValueError as err:
        logger.error("%s", err)
        return 2
    for fname in written:
        logger.info("Wrote %s", fname)
    return 0


if __name__ == '__main__':
    sys.exit(main())
