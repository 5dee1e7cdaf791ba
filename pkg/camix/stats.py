import numpy as np
import scipy.stats


def accuracy(pred, truth):
    """Fraction of correctly predicted class indices."""
    pred, truth = _check_pair(pred, truth)
    return float(np.mean(pred == truth))


def balanced_accuracy(pred, truth, m=None):
    r'''Arithmetic mean of the class-wise recalls.

    Parameters
    ----------
    pred : array_like
        Predicted class indices.
    truth : array_like
        True class indices.
    m : int, optional
        Number of classes. Classes absent from `truth` are excluded from the
        mean as their recall is undefined.

    Returns
    -------
    ba : float
    '''
    pred, truth = _check_pair(pred, truth)
    classes = np.unique(truth)
    if m is not None:
        classes = classes[classes < m]
    recalls = [np.mean(pred[truth == k] == k) for k in classes]
    return float(np.mean(recalls))


def _check_pair(pred, truth):
    pred = np.asarray(pred).reshape(-1)
    truth = np.asarray(truth).reshape(-1)
    if len(pred) != len(truth):
        raise ValueError(f"{len(pred)} predictions for {len(truth)} true labels.")
    if len(truth) == 0:
        raise ValueError("Empty label lists.")
    return pred, truth


def _rank_sum(x, y):
    return np.sum(scipy.stats.rankdata(np.concatenate([x, y]))[:len(x)])


def wilcoxon_ranksum(a, b, exact_below=20):
    r'''Two-sided Wilcoxon rank-sum test.

    Parameters
    ----------
    a, b : array_like
        The two samples, each with at least one element.
    exact_below : int
        Threshold on the pooled size len(a) + len(b). Below it the exact
        permutation distribution of the rank sum is enumerated, otherwise the
        normal approximation with tie and continuity correction is used. The
        threshold is not applied per sample, so the enumeration stays bounded
        by C(exact_below - 1, len(a)).

    Returns
    -------
    p_value : float
        1 if all pooled values coincide.
    '''
    a = np.asarray(a, dtype=float).reshape(-1)
    b = np.asarray(b, dtype=float).reshape(-1)
    if len(a) < 1 or len(b) < 1:
        raise ValueError("Both samples need at least one element.")
    pooled = np.concatenate([a, b])
    if np.all(pooled == pooled[0]):
        return 1.0
    if len(pooled) < exact_below:
        res = scipy.stats.permutation_test((a, b), _rank_sum, permutation_type='independent', vectorized=False,
                                           n_resamples=np.inf, alternative='two-sided')
        return float(min(res.pvalue, 1.0))
    return float(scipy.stats.mannwhitneyu(a, b, alternative='two-sided', method='asymptotic').pvalue)


def parameter_distance(estimate, actual, mask=None):
    """Euclidean distance between two parameter vectors, optionally restricted to a mask."""
    diff = np.asarray(estimate, dtype=float) - np.asarray(actual, dtype=float)
    if mask is not None:
        diff = diff[np.asarray(mask, dtype=bool)]
    return float(np.linalg.norm(diff))


__all__ = ['accuracy', 'balanced_accuracy', 'wilcoxon_ranksum', 'parameter_distance']
