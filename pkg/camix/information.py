import warnings
from dataclasses import dataclass
import numpy as np
import autograd.numpy as anp
from autograd import hessian as auto_hessian
from numdifftools import Hessian as num_hessian
from .estimators import Algorithm, FitConfig, e_step, loglik_from_vector, _resolve_plabels
from .linalg import is_singular, solve, inv


@dataclass(frozen=True, eq=False)
class InfoMatrices:
    """Information matrices of a mixture estimate and the derived quantities.

    Attributes
    ----------
    i_c : numpy.ndarray
        Observed complete data information.
    i_m : numpy.ndarray
        Missing information.
    i_obs : numpy.ndarray
        Observed information i_c - i_m.
    rate : numpy.ndarray
        Rate matrix J = i_c^-1 i_m of the EM iteration.
    spectral_radius : float
        Largest absolute eigenvalue of J.
    r_prime : float
        Theoretical convergence rate 1 - spectral_radius.
    se : numpy.ndarray
        Standard errors sqrt(diag(i_obs^-1)).
    param_index : tuple
        Names of the parameters labelling rows and columns.
    reduced : bool
        True if the mixing weight rows and columns are absent (CA).
    singular : bool
        True if i_c or i_obs is numerically singular; the derived fields are NaN then.
    """
    i_c: np.ndarray
    i_m: np.ndarray
    i_obs: np.ndarray
    rate: np.ndarray
    spectral_radius: float
    r_prime: float
    se: np.ndarray
    param_index: tuple = ()
    reduced: bool = False
    singular: bool = False

    @property
    def regular(self):
        """False for singular matrices or a spectral radius of at least one."""
        return (not self.singular) and bool(self.spectral_radius < 1)

    @property
    def covariance(self):
        return inv(self.i_obs)


def param_indices(alg, m, free_mask=None):
    """Indices and names of the global parameters entering the information matrices.

    Masked parameters are excluded, for CA the mixing weights are excluded as well.
    """
    alg = Algorithm.parse(alg)
    mask = FitConfig(free_mask=free_mask).mask_for(m)
    if alg is Algorithm.CA:
        mask[m.weight_slice()] = False
    idx = np.where(mask)[0]
    names = m.param_names()
    return idx, tuple(names[i] for i in idx)


def _check_responsibilities(m, data, responsibilities):
    resp = np.asarray(responsibilities, dtype=float)
    if resp.shape != (data.n, m.n_components):
        raise ValueError(f"Responsibilities of shape {resp.shape} do not match {data.n} samples and {m.n_components} components.")
    return resp


def complete_info(alg, m, data, responsibilities, free_mask=None):
    r'''Observed complete data information -E[d^2 logL_c] under the given responsibilities.

    Parameters
    ----------
    alg : Algorithm or str
        Estimator; for CA the mixing weight rows and columns are omitted.
    m : MixtureSpec
        Estimate at which the matrix is evaluated.
    data : LabeledDataset
        Samples.
    responsibilities : numpy.ndarray
        (N, M) expectations of the latent indicators from the estimator's E-step.
    free_mask : sequence of bool, optional
        Restricts the matrix to the free parameters.

    Notes
    -----
    With S_j = sum_i z_ij the mixing weight block has the diagonal
    S_j / pi_j^2 + S_M / pi_M^2 and the off-diagonal S_M / pi_M^2. Blocks
    linking different components or weights and components vanish.
    '''
    resp = _check_responsibilities(m, data, responsibilities)
    n_par = m.n_params
    i_c = np.zeros((n_par, n_par))
    n_comp = m.n_components
    if n_comp > 1:
        sums = resp.sum(axis=0)
        pi = m.weights
        with np.errstate(divide='ignore', invalid='ignore'):
            last = sums[-1] / pi[-1] ** 2
            i_c[m.weight_slice(), m.weight_slice()] = np.diag(sums[:-1] / pi[:-1] ** 2) + last
    for k, (comp, sl) in enumerate(zip(m.components, m.component_slices())):
        i_c[sl, sl] = -np.einsum('n,npq->pq', resp[:, k], comp.hessian(data.samples))
    idx, _ = param_indices(alg, m, free_mask)
    return i_c[np.ix_(idx, idx)]


def complete_scores(m, data):
    """(N, W, M) array of complete data scores, column j is the score of sample i if it belongs to component j."""
    n_comp = m.n_components
    scores = np.zeros((data.n, m.n_params, n_comp))
    if n_comp > 1:
        with np.errstate(divide='ignore'):
            inv_pi = 1 / m.weights
        for p in range(n_comp - 1):
            scores[:, p, p] = inv_pi[p]
            scores[:, p, n_comp - 1] = -inv_pi[n_comp - 1]
    for k, (comp, sl) in enumerate(zip(m.components, m.component_slices())):
        scores[:, sl, k] = comp.score(data.samples)
    return scores


def missing_info(alg, m, data, responsibilities, free_mask=None):
    r'''Missing information, the summed covariance of the complete data scores under the responsibilities.

    For each sample the complete data score is a linear function A_i of the
    latent one-hot indicator, so its covariance is
    A_i (diag(z_i) - z_i z_i^T) A_i^T. The result vanishes for one-hot
    responsibilities.
    '''
    resp = _check_responsibilities(m, data, responsibilities)
    idx, _ = param_indices(alg, m, free_mask)
    scores = complete_scores(m, data)[:, idx, :]
    cov_z = np.einsum('nm,mk->nmk', resp, np.eye(m.n_components)) - np.einsum('nm,nk->nmk', resp, resp)
    return np.einsum('nwm,nmk,nvk->wv', scores, cov_z, scores)


def _sentinel(i_c, i_m, param_index, reduced):
    n_par = len(i_c)
    return InfoMatrices(i_c, i_m, i_c - i_m, np.full((n_par, n_par), np.nan), np.nan, np.nan,
                        np.full(n_par, np.nan), tuple(param_index), reduced, True)


def mip_assemble(i_c, i_m, param_index=(), reduced=False):
    r'''Combines complete and missing information according to the missing information principle.

    Parameters
    ----------
    i_c : numpy.ndarray
        Complete data information.
    i_m : numpy.ndarray
        Missing information.
    param_index : sequence of str, optional
        Parameter names.
    reduced : bool
        Whether the mixing weight rows and columns were removed.

    Returns
    -------
    info : InfoMatrices
        If i_c or i_obs is singular a RuntimeWarning is emitted and
        rate, spectral_radius, r_prime and se are NaN.
    '''
    i_c = np.atleast_2d(np.asarray(i_c, dtype=float))
    i_m = np.atleast_2d(np.asarray(i_m, dtype=float))
    if i_c.shape != i_m.shape or i_c.shape[0] != i_c.shape[1]:
        raise ValueError(f"Information matrices of shapes {i_c.shape} and {i_m.shape} are not conformable.")
    if is_singular(i_c) or is_singular(i_c - i_m):
        warnings.warn("Singular information matrix, the problem is not regular.", RuntimeWarning)
        return _sentinel(i_c, i_m, param_index, reduced)
    i_obs = i_c - i_m
    rate = solve(i_c, i_m)
    spectral_radius = float(np.max(np.abs(np.linalg.eigvals(rate))))
    if spectral_radius >= 1:
        warnings.warn(f"Spectral radius {spectral_radius:.4g} of the rate matrix is not below one.", RuntimeWarning)
    var = np.diag(inv(i_obs))
    with np.errstate(invalid='ignore'):
        se = np.sqrt(np.where(var >= 0, var, np.nan))
    return InfoMatrices(i_c, i_m, i_obs, rate, spectral_radius, 1 - spectral_radius, se,
                        tuple(param_index), reduced, False)


def info_matrices(alg, m, data, plabels=None, free_mask=None, responsibilities=None):
    """Complete, missing and observed information of an estimate, with responsibilities from the estimator's E-step."""
    alg = Algorithm.parse(alg)
    if responsibilities is None:
        responsibilities = e_step(alg, m, data, plabels)
    _, names = param_indices(alg, m, free_mask)
    i_c = complete_info(alg, m, data, responsibilities, free_mask)
    i_m = missing_info(alg, m, data, responsibilities, free_mask)
    return mip_assemble(i_c, i_m, names, reduced=alg is Algorithm.CA)


def observed_info(alg, m, data, plabels=None, free_mask=None, num_grad=False):
    r'''Negative Hessian of the estimator's incomplete data log-likelihood.

    Parameters
    ----------
    alg : Algorithm or str
        Estimator, selects the log-likelihood.
    m : MixtureSpec
        Point at which the Hessian is taken.
    data : LabeledDataset
        Samples with labels.
    plabels : numpy.ndarray, optional
        Overrides data.plabels.
    free_mask : sequence of bool, optional
        Restricts the derivatives to the free parameters (mixing weights are
        excluded for CA).
    num_grad : bool
        Use numerical differentiation (numdifftools) instead of automatic
        differentiation (autograd).
    '''
    alg = Algorithm.parse(alg)
    if alg in (Algorithm.S, Algorithm.DCA):
        plabels = None
    else:
        plabels = _resolve_plabels(alg, m, data, plabels)
    idx, _ = param_indices(alg, m, free_mask)
    base = m.to_vector()
    base[idx] = 0.0
    projector = np.eye(m.n_params)[:, idx]
    samples = data.samples

    def loglik(theta_free):
        return loglik_from_vector(alg, m, base + anp.dot(projector, theta_free), samples, plabels)

    if num_grad is True:
        hessian = num_hessian
    else:
        hessian = auto_hessian
    return -np.atleast_2d(hessian(loglik)(m.to_vector()[idx]))


def finite_difference_observed_info(alg, m, data, plabels=None, free_mask=None):
    """Negative Hessian of the estimator's incomplete data log-likelihood by adaptive finite differences."""
    return observed_info(alg, m, data, plabels=plabels, free_mask=free_mask, num_grad=True)


__all__ = ['InfoMatrices', 'param_indices', 'complete_info', 'complete_scores', 'missing_info', 'mip_assemble',
           'info_matrices', 'observed_info', 'finite_difference_observed_info']
