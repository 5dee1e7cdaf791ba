import numpy as np
from autograd.scipy.special import logsumexp
from scipy.special import xlogy


__all__ = ["logsumexp", "xlogy", "safe_log", "log_normalize"]


def safe_log(p):
    """Elementwise natural logarithm mapping exact zeros to -inf without warnings."""
    p = np.asarray(p, dtype=float)
    return np.log(p, out=np.full_like(p, -np.inf), where=p > 0)


def log_normalize(log_w):
    r'''Normalizes the rows of a matrix of log weights.

    Parameters
    ----------
    log_w : numpy.ndarray
        (N, M) array of unnormalized log weights.

    Returns
    -------
    w : numpy.ndarray
        (N, M) array of row-normalized weights.
    log_norm : numpy.ndarray
        (N,) array of row-wise log normalization constants.
    '''
    log_w = np.asarray(log_w, dtype=float)
    log_norm = logsumexp(log_w, axis=1, keepdims=True)
    if not np.all(np.isfinite(log_norm)):
        bad = np.where(~np.isfinite(log_norm[:, 0]))[0]
        raise FloatingPointError("All weights vanish or diverge in rows " + ' '.join(str(b) for b in bad[:10]) + ".")
    return np.exp(log_w - log_norm), log_norm[:, 0]
