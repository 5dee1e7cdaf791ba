import time
import warnings
from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum
import numpy as np
import autograd.numpy as anp
from .exceptions import DegenerateComponentError
from .families import FAMILIES, ComponentParams, MultivariateNormal
from .mixture import MixtureSpec
from .special import logsumexp, log_normalize, safe_log, xlogy


class Algorithm(Enum):
    """Estimators of finite mixture parameters.

    US is the standard unsupervised EM, S the supervised estimator on the true
    labels. CA, WCA and DCA are the context-aware estimators using
    probabilistic labels: CA replaces the mixing weights in the E-step by the
    labels, WCA multiplies the standard E-step terms by them and DCA uses the
    labels as responsibilities outright.
    """
    US = 'US'
    S = 'S'
    CA = 'CA'
    WCA = 'WCA'
    DCA = 'DCA'

    @classmethod
    def parse(cls, alg):
        if isinstance(alg, cls):
            return alg
        try:
            return cls(str(alg).upper())
        except ValueError:
            raise ValueError(f"Unknown algorithm '{alg}', use one of {', '.join(a.value for a in cls)}.") from None

    @property
    def requires_plabels(self):
        return self in (Algorithm.CA, Algorithm.WCA, Algorithm.DCA)

    @property
    def requires_truth(self):
        return self is Algorithm.S

    @property
    def is_iterative(self):
        return self in (Algorithm.US, Algorithm.CA, Algorithm.WCA)

    @property
    def estimates_weights(self):
        return self is not Algorithm.CA

    def __str__(self):
        return self.value


CONTEXT_AWARE = (Algorithm.CA, Algorithm.WCA, Algorithm.DCA)


@dataclass(frozen=True)
class FitConfig:
    """Settings of the EM loop.

    Attributes
    ----------
    tol : float
        Threshold on the Euclidean norm of the parameter change between two
        iterations.
    max_iter : int
        Maximal number of EM iterations.
    m_step_regularization : float
        Variance floor and covariance ridge of the M-step.
    iter_budget_ms : float or None
        Optional wall-clock budget of the EM loop in milliseconds.
    free_mask : tuple or None
        Boolean mask over the global parameter vector, masked (False) entries
        are held at their initial values.
    shared_covariance : bool
        Pool the covariance of multivariate normal components (LDA).
    """
    tol: float = 1e-5
    max_iter: int = 300
    m_step_regularization: float = 1e-8
    iter_budget_ms: float = None
    free_mask: tuple = None
    shared_covariance: bool = False

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError(f"tol has to be positive, got {self.tol}.")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ValueError(f"max_iter has to be a positive integer, got {self.max_iter}.")
        if self.m_step_regularization < 0:
            raise ValueError("m_step_regularization has to be non-negative.")
        if self.iter_budget_ms is not None and not self.iter_budget_ms > 0:
            raise ValueError("iter_budget_ms has to be positive.")
        if self.free_mask is not None:
            object.__setattr__(self, 'free_mask', tuple(bool(f) for f in self.free_mask))

    def mask_for(self, m):
        """Boolean free mask as an array matching the parameter vector of m."""
        if self.free_mask is None:
            return np.ones(m.n_params, dtype=bool)
        if len(self.free_mask) != m.n_params:
            raise ValueError(f"free_mask has length {len(self.free_mask)}, the mixture has {m.n_params} parameters.")
        return np.array(self.free_mask)


class FitResult(Sequence):
    """Represents the result of a mixture fit.

    The final parameter vector is accessible via indices.

    Attributes
    ----------
    algorithm : Algorithm
        Estimator used for the fit.
    spec : MixtureSpec
        Estimated mixture. For CA the mixing weights are filled in by
        `ca_mixing_estimator` after EM.
    theta_trace : list
        Parameter vectors of the initial guess and of every iteration.
    converged : bool
        Whether the stopping rule was met.
    iterations : int
        Number of performed iterations.
    final_loglik : float
        Algorithm specific incomplete data log-likelihood at the estimate.
    responsibilities : numpy.ndarray
        (N, M) matrix of posterior class probabilities at the estimate.
    """

    def __init__(self, algorithm, spec, theta_trace, converged, iterations, final_loglik, responsibilities):
        self.algorithm = algorithm
        self.spec = spec
        self.theta_trace = theta_trace
        self.converged = converged
        self.iterations = iterations
        self.final_loglik = final_loglik
        self.responsibilities = responsibilities

    @property
    def theta(self):
        return self.spec.to_vector()

    def __getitem__(self, idx):
        return self.theta[idx]

    def __len__(self):
        return self.spec.n_params

    def __str__(self):
        my_str = f'{self.algorithm} fit, ' + ('converged' if self.converged else 'not converged')
        my_str += f' after {self.iterations} iteration' + 's' * (self.iterations != 1) + '\n'
        my_str += f'logL = {self.final_loglik:2.6f}\n'
        my_str += 'Fit parameters:\n'
        for name, par in zip(self.spec.param_names(), self.theta):
            my_str += name + '\t' + ' ' * int(par >= 0) + f'{par:2.6f}' + '\n'
        return my_str

    def __repr__(self):
        m = max(map(len, list(self.__dict__.keys()))) + 1
        return '\n'.join([key.rjust(m) + ': ' + repr(value) for key, value in sorted(self.__dict__.items())])


def _resolve_plabels(alg, m, data, plabels):
    if plabels is None:
        plabels = data.plabels
    if alg.requires_plabels:
        if plabels is None:
            raise ValueError(f"{alg} requires probabilistic labels.")
        plabels = np.asarray(plabels, dtype=float)
        if plabels.shape != (data.n, m.n_components):
            raise ValueError(f"Labels of shape {plabels.shape} do not match {data.n} samples and {m.n_components} components.")
        if np.any(plabels < 0):
            raise ValueError("Labels have to be non-negative.")
        if np.any(plabels.sum(axis=1) <= 0):
            raise ValueError("Every label needs positive mass.")
    if alg.requires_truth:
        if data.truth is None:
            raise ValueError("S requires the true component indices.")
        if np.any(data.truth >= m.n_components):
            raise ValueError("Truth labels exceed the number of components.")
    return plabels


def _log_terms(alg, m, data, plabels):
    """Unnormalized log E-step terms of the algorithm specific log-likelihood."""
    log_f = m.log_component_densities(data.samples)
    if alg is Algorithm.CA:
        return safe_log(plabels) + log_f
    if alg is Algorithm.WCA:
        return safe_log(plabels) + safe_log(m.weights)[None, :] + log_f
    return safe_log(m.weights)[None, :] + log_f


def e_step(alg, m, data, plabels=None):
    r'''Posterior class probabilities (responsibilities) under the E-step of an estimator.

    US: z_ij proportional to pi_j f_j(x_i).
    CA: proportional to p_ij f_j(x_i).
    WCA: proportional to p_ij pi_j f_j(x_i).
    S: one-hot at the true class. DCA: the labels verbatim.

    Parameters
    ----------
    alg : Algorithm or str
        Estimator.
    m : MixtureSpec
        Current parameters.
    data : LabeledDataset
        Samples with the labels the estimator requires.
    plabels : numpy.ndarray, optional
        Overrides data.plabels. Rows do not have to be normalized.

    Returns
    -------
    resp : numpy.ndarray
        (N, M) matrix with rows summing to one.
    '''
    alg = Algorithm.parse(alg)
    plabels = _resolve_plabels(alg, m, data, plabels)
    if alg is Algorithm.S:
        resp = np.zeros((data.n, m.n_components))
        resp[np.arange(data.n), data.truth] = 1.0
        return resp
    if alg is Algorithm.DCA:
        return plabels / plabels.sum(axis=1, keepdims=True)
    if plabels is not None:
        # row maxima are 1, uniform labels contribute log 1 = 0
        plabels = plabels / plabels.max(axis=1, keepdims=True)
    return log_normalize(_log_terms(alg, m, data, plabels))[0]


def _family_class(family):
    if isinstance(family, str):
        try:
            return FAMILIES[family]
        except KeyError:
            raise ValueError(f"Unknown family '{family}'.") from None
    if isinstance(family, type) and issubclass(family, ComponentParams):
        return family
    raise TypeError(f"Cannot interpret {family!r} as a component family.")


def m_step(family, data, responsibilities, config=None, current=None, update_weights=True):
    r'''Weighted maximum likelihood estimate of the mixture parameters for fixed responsibilities.

    Parameters
    ----------
    family : str or type
        Component family, e.g. 'normal' or UnivariateNormal.
    data : LabeledDataset
        Samples.
    responsibilities : numpy.ndarray
        (N, M) matrix of weights.
    config : FitConfig, optional
        Regularization, free mask and covariance pooling.
    current : MixtureSpec, optional
        Current parameters, source of the masked entries and of the mixing
        weights when `update_weights` is False.
    update_weights : bool
        Estimate pi_j = sum_i w_ij / N (False for the CA estimator).

    Returns
    -------
    m : MixtureSpec
    '''
    config = config or FitConfig()
    cls = _family_class(family)
    resp = np.asarray(responsibilities, dtype=float)
    x = data.samples
    if resp.shape[0] != data.n:
        raise ValueError(f"{resp.shape[0]} responsibility rows for {data.n} samples.")
    sw = resp.sum(axis=0)
    threshold = 10 * np.finfo(float).eps * data.n
    for j, s in enumerate(sw):
        if s < threshold:
            raise DegenerateComponentError(j)
    ridge = config.m_step_regularization
    if config.shared_covariance and cls is MultivariateNormal:
        comps = MultivariateNormal.fit_weighted_shared(x, resp, ridge=ridge)
    else:
        comps = [cls.fit_weighted(x, resp[:, j], ridge=ridge) for j in range(resp.shape[1])]
    if update_weights or current is None:
        weights = sw / np.sum(sw)
    else:
        weights = current.weights
    res = MixtureSpec(weights, comps)
    if current is not None and config.free_mask is not None:
        mask = config.mask_for(current)
        vec = np.where(mask, res.to_vector(), current.to_vector())
        res = current.from_vector(vec)
    return res


def incomplete_loglik(alg, m, data, plabels=None):
    r'''Incomplete data log-likelihood maximized by an estimator.

    US, S and DCA: sum_i log sum_j pi_j f_j(x_i).
    CA: sum_i log sum_j p_ij f_j(x_i).
    WCA: sum_i log sum_j p_ij pi_j f_j(x_i).
    '''
    alg = Algorithm.parse(alg)
    if alg in (Algorithm.S, Algorithm.DCA):
        plabels = None
    else:
        plabels = _resolve_plabels(alg, m, data, plabels)
    return float(np.sum(logsumexp(_log_terms(alg, m, data, plabels), axis=1)))


def loglik_from_vector(alg, template, theta, samples, plabels=None):
    """Incomplete data log-likelihood as an autograd-differentiable function of the global parameter vector."""
    alg = Algorithm.parse(alg)
    weights, comp_thetas = template.unpack(theta)
    cls = type(template.components[0])
    log_f = anp.stack([cls.logpdf_from_vector(t, samples) for t in comp_thetas], axis=1)
    if alg is Algorithm.CA:
        log_terms = safe_log(plabels) + log_f
    elif alg is Algorithm.WCA:
        log_terms = safe_log(plabels) + anp.log(weights) + log_f
    else:
        log_terms = anp.log(weights) + log_f
    return anp.sum(logsumexp(log_terms, axis=1))


def q_and_entropy(alg, m_at, m_eval, data, plabels=None):
    r'''Expected complete data log-likelihood and latent entropy of an EM step.

    Parameters
    ----------
    alg : Algorithm or str
        Estimator.
    m_at : MixtureSpec
        Parameters at which the responsibilities are taken.
    m_eval : MixtureSpec
        Parameters at which the complete data log-likelihood is evaluated.
    data : LabeledDataset
        Samples with labels.

    Returns
    -------
    q : float
        sum_ij z_ij log a_ij with z from the E-step at m_at and a the E-step
        terms at m_eval.
    h : float
        Entropy -sum_ij z_ij log z_ij of the responsibilities.

    Notes
    -----
    For the iterative estimators q + h touches `incomplete_loglik` at
    m_eval = m_at and bounds it from below elsewhere.
    '''
    alg = Algorithm.parse(alg)
    plabels = _resolve_plabels(alg, m_at, data, plabels)
    z = e_step(alg, m_at, data, plabels)
    log_a = _log_terms(alg, m_eval, data, plabels)
    support = z > 0
    q = float(np.sum(z[support] * log_a[support]))
    h = float(-np.sum(xlogy(z, z)))
    return q, h


def ca_mixing_estimator(plabels):
    """Mixing weights pi_j = (1/N) sum_i 1[j = argmax_k p_ik], ties broken by the lowest index."""
    plabels = np.atleast_2d(np.asarray(plabels, dtype=float))
    if len(plabels) < 1:
        raise ValueError("At least one label is required.")
    counts = np.bincount(np.argmax(plabels, axis=1), minlength=plabels.shape[1])
    return counts / len(plabels)


def map_classify(m, x):
    """Maximum-a-posteriori component index of each observation."""
    return m.classify(x)


def fit(alg, data, init, config=None, plabels=None, silent=False):
    r'''Estimates mixture parameters with one of the estimators.

    Parameters
    ----------
    alg : Algorithm or str
        'US', 'S', 'CA', 'WCA' or 'DCA'.
    data : LabeledDataset
        Samples, with the true indices for S and probabilistic labels for
        CA, WCA and DCA.
    init : MixtureSpec
        Initial guess, also the template for the family and the dimensions.
    config : FitConfig, optional
        EM settings, defaults to FitConfig().
    plabels : numpy.ndarray, optional
        Overrides data.plabels.
    silent : bool, optional
        If True no summary is printed and non-convergence is not warned about.

    Returns
    -------
    result : FitResult

    Notes
    -----
    S and DCA perform a single M-step on fixed responsibilities. US, CA and
    WCA iterate until the parameter change drops below config.tol (the
    mixing weights are excluded for CA, which never updates them), until the
    responsibilities stop changing, or until config.max_iter iterations.
    '''
    alg = Algorithm.parse(alg)
    config = config or FitConfig()
    plabels = _resolve_plabels(alg, init, data, plabels)
    mask = config.mask_for(init)
    compare = mask.copy()
    if not alg.estimates_weights:
        compare[init.weight_slice()] = False

    if not silent:
        print(f'{alg} fit with', int(np.sum(mask)), 'free parameter' + 's' * (np.sum(mask) != 1))

    m = init
    trace = [init.to_vector()]
    if not alg.is_iterative:
        resp = e_step(alg, m, data, plabels)
        m = m_step(type(init.components[0]), data, resp, config, current=init)
        trace.append(m.to_vector())
        iterations = 1
        converged = True
    else:
        start = time.perf_counter()
        resp = None
        iterations = 0
        converged = False
        for it in range(1, config.max_iter + 1):
            new_resp = e_step(alg, m, data, plabels)
            if resp is not None and np.array_equal(new_resp, resp):
                converged = True
                break
            resp = new_resp
            try:
                new_m = m_step(type(init.components[0]), data, resp, config, current=m,
                               update_weights=alg.estimates_weights)
            except DegenerateComponentError as err:
                err.iteration = it
                raise
            delta = np.linalg.norm((new_m.to_vector() - m.to_vector())[compare])
            m = new_m
            trace.append(m.to_vector())
            iterations = it
            if delta < config.tol:
                converged = True
                break
            if config.iter_budget_ms is not None and 1000 * (time.perf_counter() - start) > config.iter_budget_ms:
                break
        resp = e_step(alg, m, data, plabels)

    if alg is Algorithm.CA and np.all(mask[init.weight_slice()]):
        m = m.with_weights(ca_mixing_estimator(plabels))

    final_loglik = incomplete_loglik(alg, m, data, plabels)
    if not converged and not silent:
        warnings.warn(f"{alg} did not converge within {iterations} iterations.", RuntimeWarning)
    if not silent:
        print('Iterations:', iterations)
        print('logL:', final_loglik)
        print('fit parameters', m.to_vector())
    return FitResult(alg, m, trace, converged, iterations, final_loglik, resp)


__all__ = ['Algorithm', 'CONTEXT_AWARE', 'FitConfig', 'FitResult', 'e_step', 'm_step', 'incomplete_loglik',
           'loglik_from_vector', 'q_and_entropy', 'ca_mixing_estimator', 'map_classify', 'fit']
