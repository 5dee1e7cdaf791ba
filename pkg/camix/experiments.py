"""Fixed-setup experiments: likelihood landscapes and the missing information study."""
import logging
import warnings
from dataclasses import dataclass
import numpy as np
import pandas as pd
from .context import make_context_labels
from .estimators import Algorithm, FitConfig, fit, incomplete_loglik, q_and_entropy
from .families import UnivariateNormal
from .information import info_matrices
from .mixture import MixtureSpec, sample_mixture

logger = logging.getLogger(__name__)

LANDSCAPE_ALGORITHMS = ('US', 'S', 'CA', 'WCA', 'DCA', 'CAE')
LANDSCAPE_COLUMNS = ['algorithm', 'ne', 'mu1', 'logL', 'q_plus_h', 'fit_mu1', 'first_mu1']
MIP_COLUMNS = ['algorithm', 'ne', 'n_reps', 'n_excluded', 'se_pi1', 'se_mu1', 'se_mu2', 'se_sum', 'r_prime']


@dataclass(frozen=True)
class LandscapeSetup:
    """Two univariate normals where only the first mean is estimated."""
    pi1: float = 0.1
    mu1: float = 0.0
    mu2: float = 1.0
    s1: float = 0.5
    s2: float = 3.0
    n: int = 100
    init_mu1: float = 2.0
    seed: int = 0

    def actual(self):
        return MixtureSpec([self.pi1, 1 - self.pi1], [UnivariateNormal(self.mu1, self.s1), UnivariateNormal(self.mu2, self.s2)])

    def init(self):
        return self.at(self.init_mu1)

    def at(self, mu1):
        return MixtureSpec([self.pi1, 1 - self.pi1], [UnivariateNormal(mu1, self.s1), UnivariateNormal(self.mu2, self.s2)])

    @property
    def free_mask(self):
        return (False, True, False, False, False)


def _landscape_cells(algorithms, ne_set):
    for name in algorithms:
        if name == 'CAE':
            yield 'CAE', Algorithm.CA, 0.0
            continue
        alg = Algorithm.parse(name)
        if alg.requires_plabels:
            for ne in ne_set:
                yield alg.value, alg, ne
        else:
            yield alg.value, alg, np.nan


def landscape(setup=None, grid=None, algorithms=LANDSCAPE_ALGORITHMS, ne_set=(0.7,)):
    r'''Incomplete data log-likelihood and first-iteration lower bound over a grid of the free mean.

    Parameters
    ----------
    setup : LandscapeSetup, optional
        Fixed problem, defaults to LandscapeSetup().
    grid : array_like, optional
        Values of the first mean, defaults to 400 points on [-3, 4].
    algorithms : sequence of str
        Estimators, 'CAE' denotes CA with ignorant (zero negentropy) labels.
    ne_set : sequence of float
        Negentropy levels for CA, WCA and DCA.

    Returns
    -------
    curves : pandas.DataFrame
        Columns algorithm, ne, mu1, logL, q_plus_h, fit_mu1 and first_mu1.
        q_plus_h is Q(mu1, init) + H(init, init); for DCA, which has no
        iterative E-step, the entropy term is left out.
    '''
    setup = setup or LandscapeSetup()
    grid = np.linspace(-3, 4, 400) if grid is None else np.asarray(grid, dtype=float)
    rng = np.random.default_rng(setup.seed)
    data = sample_mixture(setup.actual(), setup.n, rng)
    init = setup.init()
    config = FitConfig(free_mask=setup.free_mask)
    frames = []
    for label, alg, ne in _landscape_cells(algorithms, ne_set):
        plabels = make_context_labels(data.truth, 2, ne) if alg.requires_plabels else None
        labelled = data.with_plabels(plabels) if plabels is not None else data
        with warnings.catch_warnings():
            warnings.simplefilter('ignore', RuntimeWarning)
            res = fit(alg, labelled, init, config, silent=True)
        log_l, q_plus_h = [], []
        for mu1 in grid:
            m = setup.at(mu1)
            log_l.append(incomplete_loglik(alg, m, labelled))
            q, h = q_and_entropy(alg, init, m, labelled)
            q_plus_h.append(q if alg is Algorithm.DCA else q + h)
        frames.append(pd.DataFrame({'algorithm': label, 'ne': ne, 'mu1': grid, 'logL': log_l, 'q_plus_h': q_plus_h,
                                    'fit_mu1': res.spec.components[0].mu, 'first_mu1': res.theta_trace[1][1]}))
        logger.debug("Landscape %s at ne=%s: fitted mu1 = %.6f", label, ne, res.spec.components[0].mu)
    return pd.concat(frames, ignore_index=True)[LANDSCAPE_COLUMNS]


@dataclass(frozen=True)
class MipSetup:
    """Two univariate normals with fixed standard deviations, the weight and both means are estimated."""
    pi1: float = 0.6
    mu1: float = 0.0
    mu2: float = 1.0
    s1: float = 1.0
    s2: float = 2.0
    init_pi1: float = 0.5
    init_mu1: float = 0.49
    init_mu2: float = 0.51

    def actual(self):
        return MixtureSpec([self.pi1, 1 - self.pi1], [UnivariateNormal(self.mu1, self.s1), UnivariateNormal(self.mu2, self.s2)])

    def init(self):
        return MixtureSpec([self.init_pi1, 1 - self.init_pi1],
                           [UnivariateNormal(self.init_mu1, self.s1), UnivariateNormal(self.init_mu2, self.s2)])

    @property
    def free_mask(self):
        return (True, True, False, True, False)


def _standard_errors(alg, data, init, config):
    res = fit(alg, data, init, config, silent=True)
    info = info_matrices(alg, res.spec, data, free_mask=config.free_mask)
    se = dict(zip(info.param_index, info.se))
    return {'se_pi1': se.get('pi1', np.nan), 'se_mu1': se['c1.mu'], 'se_mu2': se['c2.mu'],
            'r_prime': info.r_prime if alg.is_iterative else 1.0, 'regular': info.regular or not alg.is_iterative}


def _summarize(records, alg, ne):
    df = pd.DataFrame(records)
    kept = df[df['regular']]
    entry = {'algorithm': alg, 'ne': ne, 'n_reps': len(kept), 'n_excluded': len(df) - len(kept)}
    for key in ('se_pi1', 'se_mu1', 'se_mu2', 'r_prime'):
        entry[key] = kept[key].mean() if len(kept) and kept[key].notna().any() else np.nan
    entry['se_sum'] = np.nansum([entry['se_pi1'], entry['se_mu1'], entry['se_mu2']])
    return entry


def mip_experiment(reps=100, n=10 ** 4, ne_grid=(0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.99), seed=0,
                   setup=None, algorithms=('US', 'S', 'CA', 'WCA')):
    r'''Standard errors and convergence rates over the information content of the context.

    For every repetition a dataset of n samples is drawn, every estimator is
    fitted from the same initial guess and its information matrices are
    evaluated at the estimate. Non-regular repetitions (singular matrices or
    a spectral radius of at least one) are excluded from the means and
    counted.

    Parameters
    ----------
    reps : int
        Number of repetitions.
    n : int
        Samples per repetition.
    ne_grid : sequence of float
        Negentropy levels of the correct-context labels.
    seed : int
        Seed of the data generation.
    setup : MipSetup, optional
        Fixed problem, defaults to MipSetup().
    algorithms : sequence of str
        US and S are context independent and repeated on every ne.

    Returns
    -------
    table : pandas.DataFrame
        One row per (algorithm, ne) with the mean se_pi1 (NaN for CA),
        se_mu1, se_mu2, their sum over the estimated parameters and r_prime.
    '''
    if reps < 1 or n < 1:
        raise ValueError("reps and n have to be positive.")
    setup = setup or MipSetup()
    rng = np.random.default_rng(seed)
    config = FitConfig(free_mask=setup.free_mask)
    algs = [Algorithm.parse(a) for a in algorithms]
    records = {}
    for rep in range(reps):
        data = sample_mixture(setup.actual(), n, rng)
        with warnings.catch_warnings():
            warnings.simplefilter('ignore', RuntimeWarning)
            for alg in algs:
                if not alg.requires_plabels:
                    records.setdefault((alg.value, None), []).append(_standard_errors(alg, data, setup.init(), config))
                    continue
                for ne in ne_grid:
                    labelled = data.with_plabels(make_context_labels(data.truth, 2, ne))
                    records.setdefault((alg.value, ne), []).append(_standard_errors(alg, labelled, setup.init(), config))
        logger.info("MIP experiment: repetition %d/%d done", rep + 1, reps)
    rows = []
    for alg in algs:
        for ne in ne_grid:
            key = (alg.value, None) if not alg.requires_plabels else (alg.value, ne)
            rows.append(_summarize(records[key], alg.value, ne))
    return pd.DataFrame(rows, columns=MIP_COLUMNS)


__all__ = ['LandscapeSetup', 'landscape', 'MipSetup', 'mip_experiment']
