from dataclasses import dataclass
import numpy as np
from .exceptions import DomainError, MissingDistributionError, ZeroPriorError
from .roots import bisect_root
from .special import xlogy


_ROW_TOL = 1e-9


def negentropy(p):
    r'''Scaled negentropy NE = 1 + sum_j p_j log_M p_j of a probabilistic label.

    Terms with p_j = 0 contribute zero. The value is 0 for the uniform label
    and 1 for a one-hot label.

    Parameters
    ----------
    p : array_like
        A single label of length M or an (N, M) array of labels.

    Returns
    -------
    ne : float or numpy.ndarray
        Negentropy of the label, or of each row.
    '''
    p = np.asarray(p, dtype=float)
    m = p.shape[-1]
    if m == 1:
        return np.ones(p.shape[:-1]) if p.ndim > 1 else 1.0
    res = 1 + np.sum(xlogy(p, p), axis=-1) / np.log(m)
    res = np.clip(res, 0.0, 1.0)
    return res if p.ndim > 1 else float(res)


def _label_negentropy(q, m):
    return 1 + (xlogy(q, q) + xlogy(1 - q, (1 - q) / (m - 1))) / np.log(m)


def peaked_mass(ne, m):
    """Top-class mass q of the peaked-uniform label with negentropy ne over m classes."""
    if not 0 <= ne < 1:
        raise DomainError(f"ne has to lie in [0, 1), got {ne}.")
    if m < 2:
        raise DomainError(f"Labels need at least two classes, got {m}.")
    if _label_negentropy(1 / m, m) >= ne:
        return 1 / m
    return bisect_root(lambda q: _label_negentropy(q, m) - ne, 1 / m, 1.0)


def _peaked_labels(q, m, top):
    res = np.full((len(top), m), (1 - q) / (m - 1))
    res[np.arange(len(top)), top] = q
    return res


def make_label(ne, m, top_class):
    r'''Probabilistic label with prescribed negentropy and top class.

    The label puts mass q on `top_class` and (1 - q) / (m - 1) on every other
    class, q >= 1 / m being solved by bisection on the negentropy equation.

    Parameters
    ----------
    ne : float
        Target negentropy in [0, 1).
    m : int
        Number of classes, at least two.
    top_class : int
        Zero-based index of the class carrying the largest mass.

    Notes
    -----
    The label is a deterministic function of its arguments, no random
    generator is involved.
    '''
    if not 0 <= top_class < m:
        raise DomainError(f"top_class {top_class} out of range for {m} classes.")
    return _peaked_labels(peaked_mass(ne, m), m, np.array([top_class]))[0]


def make_context_labels(truth, m, ne, mode='correct', wrong_frac=0.0, ne_range=(0.0, 0.5), rng=None):
    r'''Probabilistic labels for a dataset with known ground truth.

    Parameters
    ----------
    truth : array_like
        Zero-based generating component indices of the samples.
    m : int
        Number of classes.
    ne : float
        Negentropy of every label in the 'correct' and 'wrong' modes.
    mode : str
        'correct': the top class of every label is the truth.
        'wrong': a random subset of round(wrong_frac * N) samples gets a top
        class drawn uniformly from the m - 1 other classes, the rest is
        correct.
        'mixed': per-sample negentropy drawn uniformly from `ne_range`, top
        class is the truth.
    wrong_frac : float
        Fraction of wrong labels for mode 'wrong'.
    ne_range : tuple
        (ne_low, ne_high) for mode 'mixed'.
    rng : numpy.random.Generator
        Required for the modes 'wrong' and 'mixed'.

    Returns
    -------
    plabels : numpy.ndarray
        (N, m) array of labels.
    '''
    truth = np.asarray(truth, dtype=int).reshape(-1)
    if np.any(truth < 0) or np.any(truth >= m):
        raise DomainError(f"Truth labels have to lie in [0, {m}).")
    if mode == 'correct':
        return _peaked_labels(peaked_mass(ne, m), m, truth)
    if rng is None:
        raise ValueError(f"Mode '{mode}' needs a random generator.")
    if mode == 'wrong':
        if not 0 <= wrong_frac <= 1:
            raise DomainError(f"wrong_frac has to lie in [0, 1], got {wrong_frac}.")
        n_wrong = int(np.floor(wrong_frac * len(truth) + 0.5))
        top = truth.copy()
        idx = rng.choice(len(truth), size=n_wrong, replace=False)
        top[idx] = (truth[idx] + rng.integers(1, m, size=n_wrong)) % m
        return _peaked_labels(peaked_mass(ne, m), m, top)
    if mode == 'mixed':
        ne_low, ne_high = ne_range
        if not 0 <= ne_low <= ne_high <= 1:
            raise DomainError(f"Invalid negentropy range {ne_range}.")
        nes = rng.uniform(ne_low, ne_high, size=len(truth))
        res = np.empty((len(truth), m))
        for i, (n_i, t_i) in enumerate(zip(nes, truth)):
            res[i] = make_label(n_i, m, t_i)
        return res
    raise ValueError(f"Unknown label mode '{mode}'.")


def _check_rows(arr, name):
    if np.any(arr < 0) or np.any(arr > 1):
        raise ValueError(f"Entries of {name} have to lie in [0, 1].")
    if np.max(np.abs(arr.sum(axis=-1) - 1)) > _ROW_TOL:
        raise ValueError(f"Rows of {name} have to sum to one.")


@dataclass(frozen=True, eq=False)
class ContextModel:
    """Discrete context variable c with its prior and its relation to the latent class z.

    Attributes
    ----------
    prior : numpy.ndarray
        p(c) over L context values.
    cond_z_given_c : numpy.ndarray or None
        (L, M) table of p(z | c), used by the CA estimator.
    cond_c_given_z : numpy.ndarray or None
        (M, L) table of p(c | z), used by the WCA estimator.
    observed : bool
        Whether the value of c is observed for each sample.
    """
    prior: np.ndarray
    cond_z_given_c: np.ndarray = None
    cond_c_given_z: np.ndarray = None
    observed: bool = True

    def __post_init__(self):
        prior = np.array(self.prior, dtype=float).reshape(-1)
        _check_rows(prior, 'prior')
        object.__setattr__(self, 'prior', prior)
        if self.cond_z_given_c is not None:
            table = np.atleast_2d(np.array(self.cond_z_given_c, dtype=float))
            if table.shape[0] != len(prior):
                raise ValueError(f"p(z|c) has {table.shape[0]} rows for {len(prior)} context values.")
            _check_rows(table, 'p(z|c)')
            object.__setattr__(self, 'cond_z_given_c', table)
        if self.cond_c_given_z is not None:
            table = np.atleast_2d(np.array(self.cond_c_given_z, dtype=float))
            if table.shape[1] != len(prior):
                raise ValueError(f"p(c|z) has {table.shape[1]} columns for {len(prior)} context values.")
            _check_rows(table, 'p(c|z)')
            object.__setattr__(self, 'cond_c_given_z', table)
        if self.cond_z_given_c is not None and self.cond_c_given_z is not None:
            if self.cond_z_given_c.shape[1] != self.cond_c_given_z.shape[0]:
                raise ValueError("p(z|c) and p(c|z) disagree on the number of classes.")

    @property
    def n_contexts(self):
        return len(self.prior)

    def _check_index(self, c):
        if not self.observed:
            raise ValueError("The context is not observed.")
        if not 0 <= c < self.n_contexts:
            raise IndexError(f"Context value {c} out of range for {self.n_contexts} values.")


def derive_label_ca_latent(ctx):
    """Label for an unobserved context, p_i = sum_c p(c) p(z | c)."""
    if ctx.cond_z_given_c is None:
        raise MissingDistributionError("The context model has no p(z|c) table.")
    label = ctx.prior @ ctx.cond_z_given_c
    return label / np.sum(label)


def derive_label_ca_observed(ctx, c):
    """Label for an observed context value c, p_i = p(z | c)."""
    if ctx.cond_z_given_c is None:
        raise MissingDistributionError("The context model has no p(z|c) table.")
    ctx._check_index(c)
    return ctx.cond_z_given_c[c].copy()


def derive_label_wca(ctx, c, normalize=True):
    r'''Label for the WCA estimator, p_ij = p(c | z_j) / p(c) at the observed context value c.

    Parameters
    ----------
    ctx : ContextModel
        Observed context model with a p(c|z) table.
    c : int
        Observed context value.
    normalize : bool
        If True (default) the label is rescaled to sum to one, which leaves
        the WCA responsibilities unchanged.
    '''
    if ctx.cond_c_given_z is None:
        raise MissingDistributionError("The context model has no p(c|z) table.")
    ctx._check_index(c)
    if ctx.prior[c] <= 0:
        raise ZeroPriorError(f"p(c={c}) is zero.")
    label = ctx.cond_c_given_z[:, c] / ctx.prior[c]
    if not normalize:
        return label
    if np.sum(label) <= 0:
        raise ZeroPriorError(f"p(c={c}|z) vanishes for every class.")
    return label / np.sum(label)


__all__ = ['negentropy', 'peaked_mass', 'make_label', 'make_context_labels', 'ContextModel',
           'derive_label_ca_latent', 'derive_label_ca_observed', 'derive_label_wca']
