import numpy as np
import scipy.optimize
from .exceptions import NoRootError


def find_bracketed_root(func, start, step=1.0, direction=1, max_expand=60, growth=2.0, **kwargs):
    r'''Finds a root of func on the half line starting at `start`.

    The bracket is established by expanding geometrically from `start` in the
    given direction until func changes sign, then refined with Brent's method.

    Parameters
    ----------
    func : callable
        Scalar function of one real variable.
    start : float
        Left (direction=1) or right (direction=-1) end of the search half line.
        func(start) must be finite.
    step : float
        Initial bracket width.
    direction : int
        +1 to search above `start`, -1 to search below.
    max_expand : int
        Maximal number of bracket expansions.
    growth : float
        Expansion factor per step.
    All keyword arguments of scipy.optimize.brentq.

    Returns
    -------
    root : float
    '''
    if direction not in (1, -1):
        raise ValueError("direction has to be +1 or -1.")
    f_start = func(start)
    if f_start == 0:
        return start
    lower, upper = start, start + direction * step
    for _ in range(max_expand):
        f_upper = func(upper)
        if np.isfinite(f_upper):
            if np.sign(f_upper) != np.sign(f_start):
                break
            lower = upper
        step *= growth
        upper = start + direction * step
    else:
        raise NoRootError(f"No sign change found within {max_expand} expansions from {start}.")
    kwargs.setdefault('xtol', 1e-14)
    kwargs.setdefault('maxiter', 500)
    a, b = sorted([lower, upper])
    return scipy.optimize.brentq(func, a, b, **kwargs)


def bisect_root(func, lower, upper, xtol=1e-15, maxiter=200):
    """Bisection on [lower, upper]; func(lower) and func(upper) must differ in sign."""
    f_lower, f_upper = func(lower), func(upper)
    if f_lower == 0:
        return lower
    if f_upper == 0:
        return upper
    if np.sign(f_lower) == np.sign(f_upper):
        raise NoRootError(f"func has the same sign at {lower} and {upper}.")
    return scipy.optimize.bisect(func, lower, upper, xtol=xtol, maxiter=maxiter, disp=False)
