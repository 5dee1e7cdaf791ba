"""Monte Carlo comparison of the estimators on randomly generated estimation problems."""
import dataclasses
import logging
import warnings
from dataclasses import dataclass
import numpy as np
import pandas as pd
from .context import make_context_labels, negentropy
from .estimators import Algorithm, FitConfig, fit
from .exceptions import NoRootError, DegenerateComponentError
from .families import UnivariateNormal, MultivariateNormal, MaxwellBoltzmann, LinearRegressor
from .information import info_matrices
from .linalg import random_spd
from .misc import derive_rng, derive_seed, format_ne, balanced_problem_size
from .mixture import MixtureSpec, sample_mixture, solve_param_for_kl
from .stats import accuracy, balanced_accuracy, wilcoxon_ranksum, parameter_distance

logger = logging.getLogger(__name__)

SCENARIO_IDS = ('a', 'b', 'c', 'd', 'e', 'f', 'mixed', 'wrong', 'biased')
DEFAULT_NE_GRID = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.99)
DEFAULT_ALGORITHMS = ('US', 'S', 'CA', 'WCA', 'DCA')
ROW_COLUMNS = ['scenario', 'problem_id', 'algorithm', 'ne', 'converged', 'iterations', 'D', 'ASE', 'r_prime',
               'acc', 'ba', 'mse', 'bias_b', 'seed']
METRICS = ['D', 'ASE', 'r_prime', 'acc', 'ba', 'mse', 'bias_b']
ALPHA = 0.01

_UNIFORM_SKL = {'c': (3.0, 20.0)}
_UNIFORM_IKL = {'c': (0.1, 1.0)}


@dataclass(frozen=True)
class ScenarioSpec:
    """Definition of a Monte Carlo scenario.

    Attributes
    ----------
    id : str
        'a' two univariate normals with known standard deviations and weights,
        'b' two univariate normals, 'c' three univariate normals,
        'd' two bivariate normals, 'e' two Maxwell-Boltzmann components,
        'f' two linear regressors, 'mixed', 'wrong' and 'biased' are variants
        of 'b' with mixed information content, partly wrong context and
        unbalanced classes.
    problems : int
        Number of generated problems.
    ne_grid : tuple
        Negentropy levels of the probabilistic labels.
    master_seed : int
        Seed all random streams are derived from.
    algorithms : tuple
        Estimators to compare.
    wrong_frac : float
        Fraction of wrong labels in the 'wrong' scenario.
    pi1 : float
        Actual weight of the first component in the 'biased' scenario.
    mixed_range : tuple
        Range of the per-sample negentropy in the 'mixed' scenario.
    kl_direction : str
        Direction of the divergence between actual components.
    ikl_direction : str
        Direction of the divergence between initial and actual components.
    max_retries : int
        Maximal number of redraws when a separability level cannot be met.
    """
    id: str
    problems: int = 1000
    ne_grid: tuple = DEFAULT_NE_GRID
    master_seed: int = 0
    algorithms: tuple = DEFAULT_ALGORITHMS
    wrong_frac: float = 0.5
    pi1: float = 0.2
    mixed_range: tuple = (0.0, 0.5)
    kl_direction: str = 'forward'
    ikl_direction: str = 'forward'
    max_retries: int = 100

    def __post_init__(self):
        if self.id not in SCENARIO_IDS:
            raise ValueError(f"Unknown scenario '{self.id}', use one of {', '.join(SCENARIO_IDS)}.")
        if self.problems < 1:
            raise ValueError("problems has to be positive.")
        object.__setattr__(self, 'ne_grid', tuple(float(ne) for ne in self.ne_grid))
        if any(not 0 <= ne < 1 for ne in self.ne_grid):
            raise ValueError("Negentropy levels have to lie in [0, 1).")
        object.__setattr__(self, 'algorithms', tuple(Algorithm.parse(a).value for a in self.algorithms))
        if self.id == 'wrong':
            steps = self.wrong_frac * 10
            if not (0.1 - 1e-12 <= self.wrong_frac <= 0.9 + 1e-12 and abs(steps - round(steps)) < 1e-9):
                raise ValueError(f"wrong_frac has to be one of 0.1, 0.2, ..., 0.9, got {self.wrong_frac}.")
        if self.id == 'biased' and not 0.1 <= self.pi1 <= 0.9:
            raise ValueError(f"pi1 has to lie in [0.1, 0.9], got {self.pi1}.")
        low, high = self.mixed_range
        if not 0 <= low <= high < 1:
            raise ValueError(f"Invalid negentropy range {self.mixed_range}.")
        for direction in (self.kl_direction, self.ikl_direction):
            if direction not in ('forward', 'reverse'):
                raise ValueError("KL directions have to be 'forward' or 'reverse'.")

    @property
    def base_id(self):
        """Problem generator of the scenario, the context variants use two univariate normals."""
        return 'b' if self.id in ('mixed', 'wrong', 'biased') else self.id

    @property
    def label_mode(self):
        return {'mixed': 'mixed', 'wrong': 'wrong'}.get(self.id, 'correct')


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """A generated estimation problem with training and test data."""
    scenario: str
    idx: int
    actual: MixtureSpec
    init: MixtureSpec
    train: object
    test: object
    free_mask: tuple
    skl: tuple = ()
    ikl: tuple = ()
    retries: int = 0


@dataclass(frozen=True, eq=False)
class ScenarioReport:
    """Per-problem rows, aggregates and significance tests of a scenario run."""
    spec: ScenarioSpec
    rows: pd.DataFrame
    aggregates: pd.DataFrame
    significance: pd.DataFrame


def _free_mask(base_id, m):
    mask = np.ones(m.n_params, dtype=bool)
    if base_id == 'a':
        mask[m.weight_slice()] = False
        for sl in m.component_slices():
            mask[sl.start + 1] = False
    return tuple(mask)


class _Separator:
    """Solves free parameters for random separability levels, redrawing infeasible draws."""

    def __init__(self, spec, rng):
        self.spec = spec
        self.rng = rng
        self.retries = 0

    def solve(self, fixed, kl_range, draw_partial, free_axis, direction):
        for _ in range(self.spec.max_retries + 1):
            target = self.rng.uniform(*kl_range)
            try:
                return solve_param_for_kl(fixed, target, draw_partial(), free_axis, self.rng, direction=direction), target
            except NoRootError:
                self.retries += 1
        raise NoRootError(f"No admissible draw within {self.spec.max_retries} retries.")


def _draw_normals(sep, n_comp):
    spec, rng = sep.spec, sep.rng
    skl_range = _UNIFORM_SKL.get(spec.base_id, (0.1, 3.0))
    ikl_range = _UNIFORM_IKL.get(spec.base_id, (0.1, 3.0))
    actual = [UnivariateNormal(rng.uniform(0, 1), rng.uniform(0.1, 0.6))]
    skl = []
    for j in range(1, n_comp):
        comp, target = sep.solve(actual[j - 1], skl_range, lambda: UnivariateNormal(0.0, rng.uniform(0.1, 0.6)),
                                 'mu', spec.kl_direction)
        actual.append(comp)
        skl.append(target)
    init, ikl = [], []
    for j in range(n_comp):
        if spec.base_id == 'a':
            sigma = actual[j].sigma

            def draw():
                return UnivariateNormal(0.0, sigma)
        else:
            def draw():
                return UnivariateNormal(0.0, rng.uniform(0.1, 0.6))
        comp, target = sep.solve(actual[j], ikl_range, draw, 'mu', spec.ikl_direction)
        init.append(comp)
        ikl.append(target)
    return actual, init, skl, ikl


def _draw_mvnormals(sep, dim=2):
    spec, rng = sep.spec, sep.rng
    actual = [MultivariateNormal(rng.uniform(0, 1, size=dim), random_spd(rng, dim))]
    comp, target = sep.solve(actual[0], (0.1, 3.0), lambda: MultivariateNormal(np.zeros(dim), random_spd(rng, dim)),
                             'mu', spec.kl_direction)
    actual.append(comp)
    skl = [target]
    init, ikl = [], []
    for j in range(2):
        comp, target = sep.solve(actual[j], (0.1, 3.0), lambda: MultivariateNormal(np.zeros(dim), random_spd(rng, dim)),
                                 'mu', spec.ikl_direction)
        init.append(comp)
        ikl.append(target)
    return actual, init, skl, ikl


def _draw_maxwell(sep):
    spec, rng = sep.spec, sep.rng
    actual = [MaxwellBoltzmann(rng.uniform(1, 6))]
    comp, target = sep.solve(actual[0], (0.1, 3.0), lambda: MaxwellBoltzmann(1.0), 'a', spec.kl_direction)
    actual.append(comp)
    skl = [target]
    init, ikl = [], []
    for j in range(2):
        comp, target = sep.solve(actual[j], (0.1, 3.0), lambda: MaxwellBoltzmann(1.0), 'a', spec.ikl_direction)
        init.append(comp)
        ikl.append(target)
    return actual, init, skl, ikl


def _draw_regressor(rng):
    return LinearRegressor(rng.uniform(-1, 1), np.tan(rng.uniform(-np.pi / 3, np.pi / 3)), rng.uniform(0.5, 2))


def _draw_components(sep):
    base_id = sep.spec.base_id
    if base_id in ('a', 'b'):
        return _draw_normals(sep, 2)
    if base_id == 'c':
        return _draw_normals(sep, 3)
    if base_id == 'd':
        return _draw_mvnormals(sep)
    if base_id == 'e':
        return _draw_maxwell(sep)
    return [_draw_regressor(sep.rng) for _ in range(2)], [_draw_regressor(sep.rng) for _ in range(2)], [], []


def generate_problem(spec, idx, rng=None):
    r'''Generates a random estimation problem of a scenario.

    All but one parameter per component are drawn uniformly, the remaining
    one is solved for a randomly drawn separability between consecutive
    actual components and between each initial and actual component.
    Draws for which a separability level cannot be met are repeated up to
    spec.max_retries times per component.

    Parameters
    ----------
    spec : ScenarioSpec
        Scenario definition.
    idx : int
        Problem index.
    rng : numpy.random.Generator, optional
        Defaults to a generator derived from (master_seed, id, idx).

    Returns
    -------
    problem : ProblemInstance
    '''
    if not 0 <= idx < spec.problems:
        raise ValueError(f"Problem index {idx} out of range for {spec.problems} problems.")
    if rng is None:
        rng = derive_rng(spec.master_seed, spec.id, idx, 'problem')
    sep = _Separator(spec, rng)
    actual, init, skl, ikl = _draw_components(sep)
    if sep.retries:
        logger.warning("Problem %d of scenario %s needed %d redraws.", idx, spec.id, sep.retries)

    n_comp = len(actual)
    if spec.id == 'biased':
        weights = np.array([spec.pi1, 1 - spec.pi1])
    else:
        weights = np.full(n_comp, 1 / n_comp)
    actual_m = MixtureSpec(weights, actual)
    init_m = MixtureSpec(np.full(n_comp, 1 / n_comp), init)
    free_mask = _free_mask(spec.base_id, actual_m)
    n = balanced_problem_size(int(np.sum(free_mask)), n_comp)
    train = sample_mixture(actual_m, n, rng, stratified=True)
    test = sample_mixture(actual_m, n, rng, stratified=True)
    return ProblemInstance(spec.id, idx, actual_m, init_m, train, test, free_mask, tuple(skl), tuple(ikl), sep.retries)


def _component_distance(est, actual, k, mask):
    """Distance restricted to the parameters of component k and its mixing weight."""
    sel = np.zeros(actual.n_params, dtype=bool)
    sel[actual.component_slices()[k]] = True
    vec_e, vec_a = est.to_vector(), actual.to_vector()
    block = parameter_distance(vec_e, vec_a, sel & np.asarray(mask))
    return float(np.sqrt(block ** 2 + (est.weights[k] - actual.weights[k]) ** 2))


def _regression_mse(est, test):
    comp = est.classify(test.samples)
    beta0 = np.array([c.beta0 for c in est.components])
    beta1 = np.array([c.beta1 for c in est.components])
    pred = beta0[comp] + beta1[comp] * test.samples[:, 0]
    return float(np.mean((test.samples[:, 1] - pred) ** 2))


def _empty_row(problem, alg, ne, seed):
    row = dict.fromkeys(ROW_COLUMNS, np.nan)
    row.update(scenario=problem.scenario, problem_id=problem.idx, algorithm=alg, ne=ne, converged=False,
               iterations=0, seed=seed)
    return row


def _evaluate(problem, alg, ne, seed, plabels, config):
    row = _empty_row(problem, alg.value, ne, seed)
    data = problem.train.with_plabels(plabels) if plabels is not None else problem.train
    res = fit(alg, data, problem.init, config, silent=True)
    est = res.spec
    row['converged'] = res.converged
    row['iterations'] = res.iterations
    row['D'] = parameter_distance(est.to_vector(), problem.actual.to_vector(), problem.free_mask)
    info = info_matrices(alg, est, data, free_mask=problem.free_mask)
    row['ASE'] = float(np.nanmean(info.se)) if np.any(np.isfinite(info.se)) else np.nan
    row['r_prime'] = info.r_prime if alg.is_iterative else 1.0
    pred = est.classify(problem.test.samples)
    row['acc'] = accuracy(pred, problem.test.truth)
    row['ba'] = balanced_accuracy(pred, problem.test.truth, est.n_components)
    if est.family == 'regressor':
        row['mse'] = _regression_mse(est, problem.test)
    if problem.scenario == 'biased':
        row['bias_b'] = (_component_distance(est, problem.actual, 0, problem.free_mask)
                         - _component_distance(est, problem.actual, 1, problem.free_mask))
    return row


def run_problem(problem, algorithms, ne_grid, config=None, mode='correct', wrong_frac=0.5, mixed_range=(0.0, 0.5),
                master_seed=0):
    r'''Solves a problem with every estimator and computes the row metrics.

    US and S yield one row each. CA, WCA and DCA yield one row per
    negentropy level, in mode 'mixed' a single row carrying the mean label
    negentropy. Labels are regenerated for every cell from a seed derived
    from (master_seed, scenario, problem index, negentropy, algorithm).

    Parameters
    ----------
    problem : ProblemInstance
        Generated problem.
    algorithms : sequence
        Estimators to run.
    ne_grid : sequence of float
        Negentropy levels.
    config : FitConfig, optional
        EM settings, the free mask of the problem is always applied.
    mode : str
        Label mode, 'correct', 'wrong' or 'mixed'.

    Returns
    -------
    rows : list of dict
        Failed cells are logged and reported with missing metrics.
    '''
    config = dataclasses.replace(config or FitConfig(), free_mask=problem.free_mask)
    n_comp = problem.actual.n_components
    rows = []
    cells = []
    for alg in (Algorithm.parse(a) for a in algorithms):
        if not alg.requires_plabels:
            cells.append((alg, np.nan, derive_seed(master_seed, problem.scenario, problem.idx, '-', alg.value)))
        elif mode == 'mixed':
            cells.append((alg, np.nan, derive_seed(master_seed, problem.scenario, problem.idx, 'mixed', alg.value)))
        else:
            for ne in ne_grid:
                cells.append((alg, ne, derive_seed(master_seed, problem.scenario, problem.idx, format_ne(ne), alg.value)))
    for alg, ne, seed in cells:
        plabels = None
        if alg.requires_plabels:
            rng = np.random.default_rng(seed)
            if mode == 'mixed':
                plabels = make_context_labels(problem.train.truth, n_comp, 0.0, 'mixed', ne_range=mixed_range, rng=rng)
                ne = float(np.mean(negentropy(plabels)))
            else:
                plabels = make_context_labels(problem.train.truth, n_comp, ne, mode, wrong_frac=wrong_frac, rng=rng)
        try:
            with warnings.catch_warnings():
                warnings.simplefilter('ignore', RuntimeWarning)
                rows.append(_evaluate(problem, alg, ne, seed, plabels, config))
        except (DegenerateComponentError, FloatingPointError, np.linalg.LinAlgError, ValueError) as err:
            logger.warning("Problem %d, %s at ne=%s failed: %s", problem.idx, alg, ne, err)
            rows.append(_empty_row(problem, alg.value, ne, seed))
    return rows


def _group_labels(rows, mode):
    if mode == 'mixed':
        return rows['algorithm'].copy()
    return rows.apply(lambda r: r['algorithm'] if pd.isna(r['ne']) else f"{r['algorithm']}@{format_ne(r['ne'])}", axis=1)


def aggregate(rows, mode='correct'):
    """Mean and standard deviation of every metric per (algorithm, ne), with non-convergence counts."""
    df = rows.copy()
    df['group'] = _group_labels(df, mode)
    out = []
    for group, sub in df.groupby('group', sort=False):
        entry = {'scenario': sub['scenario'].iloc[0], 'algorithm': sub['algorithm'].iloc[0],
                 'ne': sub['ne'].mean() if sub['ne'].notna().any() else np.nan, 'n': len(sub)}
        for metric in METRICS + ['iterations']:
            values = sub[metric].astype(float)
            entry['mean_' + metric] = values.mean()
            entry['std_' + metric] = values.std(ddof=1) if values.notna().sum() > 1 else np.nan
        entry['n_nonconverged'] = int((~sub['converged'].astype(bool)).sum())
        entry['n_nonregular'] = int((sub['r_prime'].isna() | (sub['r_prime'] <= 0)).sum())
        out.append(entry)
    return pd.DataFrame(out)


def _comparisons(groups, mode):
    algs = {}
    for g in groups:
        alg, _, ne = g.partition('@')
        algs.setdefault(ne, {})[alg] = g
    pairs = []
    reference = algs.get('', {})
    for ne, by_alg in algs.items():
        if ne == '' and mode != 'mixed':
            continue
        for alg in ('CA', 'WCA', 'DCA'):
            if alg not in by_alg:
                continue
            for ref in ('US', 'S'):
                if ref in reference:
                    pairs.append((by_alg[alg], reference[ref]))
        for a, b in (('CA', 'WCA'), ('CA', 'DCA'), ('WCA', 'DCA')):
            if a in by_alg and b in by_alg:
                pairs.append((by_alg[a], by_alg[b]))
    return pairs


def significance(rows, mode='correct', alpha=ALPHA):
    """Wilcoxon rank-sum tests of the context-aware estimators against US, S and each other at equal ne."""
    df = rows.copy()
    df['group'] = _group_labels(df, mode)
    groups = list(dict.fromkeys(df['group']))
    out = []
    for a, b in _comparisons(groups, mode):
        for metric in METRICS:
            va = df.loc[df['group'] == a, metric].astype(float).dropna().values
            vb = df.loc[df['group'] == b, metric].astype(float).dropna().values
            if len(va) == 0 or len(vb) == 0:
                continue
            p = wilcoxon_ranksum(va, vb)
            out.append({'metric': metric, 'group_a': a, 'group_b': b, 'p_value': p, 'significant': bool(p < alpha)})
    return pd.DataFrame(out, columns=['metric', 'group_a', 'group_b', 'p_value', 'significant'])


def run_scenario(spec, config=None):
    r'''Generates and solves all problems of a scenario.

    Parameters
    ----------
    spec : ScenarioSpec
        Scenario definition.
    config : FitConfig, optional
        EM settings.

    Returns
    -------
    report : ScenarioReport
        Rows ordered by problem index, algorithm and ne, their aggregates and
        the significance tests.
    '''
    rows = []
    for idx in range(spec.problems):
        try:
            problem = generate_problem(spec, idx)
        except NoRootError as err:
            logger.warning("Skipping problem %d of scenario %s: %s", idx, spec.id, err)
            continue
        rows += run_problem(problem, spec.algorithms, spec.ne_grid, config, mode=spec.label_mode,
                            wrong_frac=spec.wrong_frac, mixed_range=spec.mixed_range, master_seed=spec.master_seed)
        if (idx + 1) % max(1, spec.problems // 10) == 0:
            logger.info("Scenario %s: %d/%d problems solved", spec.id, idx + 1, spec.problems)
    df = pd.DataFrame(rows, columns=ROW_COLUMNS)
    df['ne'] = df['ne'].astype(float)
    return ScenarioReport(spec, df, aggregate(df, spec.label_mode), significance(df, spec.label_mode))


__all__ = ['SCENARIO_IDS', 'DEFAULT_NE_GRID', 'DEFAULT_ALGORITHMS', 'ROW_COLUMNS', 'ScenarioSpec', 'ProblemInstance',
           'ScenarioReport', 'generate_problem', 'run_problem', 'aggregate', 'significance', 'run_scenario']
