import hashlib
import platform
import numpy as np
import scipy
import autograd
import numdifftools
import pandas as pd
from .version import __version__


def print_config():
    """Print information about version of python, camix and dependencies."""
    config = {"system": platform.system(),
              "python": platform.python_version(),
              "camix": __version__,
              "numpy": np.__version__,
              "scipy": scipy.__version__,
              "autograd": getattr(autograd, '__version__', 'unknown'),
              "numdifftools": numdifftools.__version__,
              "pandas": pd.__version__}

    for key, value in config.items():
        print(f"{key: <12}\t {value}")


def derive_seed(*keys):
    """Derives a 64 bit seed from an arbitrary sequence of keys.

    The keys are converted to strings and hashed with sha256, so the result is
    independent of the python hash seed and of the platform.

    Parameters
    ----------
    keys
        Master seed, identifiers, indices, ... Floats should be passed
        pre-formatted to avoid representation ambiguities.

    Returns
    -------
    seed : int
    """
    digest = hashlib.sha256('|'.join(str(k) for k in keys).encode('utf-8')).digest()
    return int.from_bytes(digest[:8], 'little')


def derive_rng(*keys):
    """numpy Generator seeded by derive_seed(*keys)."""
    return np.random.default_rng(derive_seed(*keys))


def format_ne(ne):
    """Canonical string form of a negentropy level used for seeding and tables."""
    return f"{ne:.6f}"


def balanced_problem_size(n_free, n_components, per_param=100):
    """Number of samples per_param * n_free, rounded up to a multiple of n_components."""
    n = per_param * n_free
    return int(np.ceil(n / n_components) * n_components)


__all__ = ['print_config', 'derive_seed', 'derive_rng', 'format_ne', 'balanced_problem_size']
