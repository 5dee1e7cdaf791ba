import numpy as np
from scipy.integrate import quad as squad


def quad(func, a, b, **kwargs):
    '''Performs a (one-dimensional) numeric integration of func(x) from a to b.

    Thin wrapper around scipy.integrate.quad which forwards all keyword
    arguments quad understands and discards the rest.

    Parameters
    ----------
    func : callable
        Scalar integrand.
    a: float
        Lower limit of integration (use -numpy.inf for -infinity).
    b: float
        Upper limit of integration (use numpy.inf for infinity).
    All parameters of scipy.integrate.quad

    Returns
    -------
    y : float
        The integral of func from `a` to `b`.
    abserr : float
        An estimate of the absolute error in the result.
    '''
    intpars = squad.__code__.co_varnames[3:3 + len(squad.__defaults__)]
    ikwargs = {k: kwargs[k] for k in intpars if k in kwargs}
    ikwargs.setdefault('limit', 200)
    res = squad(func, a, b, **ikwargs)
    return res[0], res[1]


def kl_quad(c1, c2, a, b, **kwargs):
    r'''Numerical Kullback-Leibler divergence KL(c1 || c2) of two scalar components.

    Parameters
    ----------
    c1, c2 : ComponentParams
        Univariate components (normal or Maxwell-Boltzmann).
    a, b : float
        Integration range, has to lie within the support of c1.
    '''
    def integrand(x):
        lf1 = c1.log_density(x)
        return np.exp(lf1) * (lf1 - c2.log_density(x))

    return quad(integrand, a, b, **kwargs)[0]


def density_integral(spec, a, b, **kwargs):
    """Integral of the mixture density of a univariate spec over [a, b]."""
    from .mixture import mixture_density
    return quad(lambda x: mixture_density(spec, x), a, b, **kwargs)[0]
