from dataclasses import dataclass
import numpy as np
import autograd.numpy as anp
from .families import ComponentParams, UnivariateNormal, MultivariateNormal, MaxwellBoltzmann, LinearRegressor, FAMILIES
from .exceptions import FamilyMismatchError, UnsupportedFamilyError, NoRootError
from .roots import find_bracketed_root
from .special import logsumexp, safe_log


@dataclass(frozen=True, eq=False)
class MixtureSpec:
    """Finite mixture model: mixing weights and M components of a common family.

    The global parameter vector is (pi_1, ..., pi_{M-1}, theta_1, ..., theta_M)
    where theta_j is the parameter vector of component j in the ordering of its
    family.

    Attributes
    ----------
    weights : numpy.ndarray
        Mixing weights, summing to one.
    components : tuple
        Component parameters, all of the same family and dimension.

    Notes
    -----
    A single component and zero weights are accepted as the degenerate limits
    of a mixture. Estimation and the information matrices assume M >= 2 and
    weights in (0, 1).
    """
    weights: np.ndarray
    components: tuple

    def __post_init__(self):
        weights = np.array(self.weights, dtype=float).reshape(-1)
        components = tuple(self.components)
        if len(components) < 1:
            raise ValueError("A mixture needs at least one component.")
        if len(weights) != len(components):
            raise ValueError(f"{len(weights)} weights for {len(components)} components.")
        if not all(isinstance(c, ComponentParams) for c in components):
            raise TypeError("Components have to be ComponentParams.")
        if len(set(type(c) for c in components)) > 1:
            raise FamilyMismatchError("All components have to belong to the same family.")
        if len(set(c.dim for c in components)) > 1:
            raise FamilyMismatchError("All components have to share one dimension.")
        if np.any(weights < 0) or np.any(weights > 1):
            raise ValueError("Mixing weights have to lie in [0, 1].")
        if abs(np.sum(weights) - 1) > 1e-12:
            raise ValueError(f"Mixing weights sum to {np.sum(weights)} instead of 1.")
        weights.setflags(write=False)
        object.__setattr__(self, 'weights', weights)
        object.__setattr__(self, 'components', components)

    @property
    def family(self):
        return self.components[0].family

    @property
    def n_components(self):
        return len(self.components)

    @property
    def dim(self):
        return self.components[0].dim

    @property
    def n_params(self):
        return len(self.to_vector())

    def component_slices(self):
        """Slices of the global parameter vector belonging to each component."""
        slices = []
        start = self.n_components - 1
        for c in self.components:
            slices.append(slice(start, start + c.n_params))
            start += c.n_params
        return slices

    def weight_slice(self):
        return slice(0, self.n_components - 1)

    def to_vector(self):
        return np.concatenate([self.weights[:-1]] + [c.to_vector() for c in self.components])

    def from_vector(self, vec):
        """Builds a spec of the same structure from a global parameter vector."""
        vec = np.asarray(vec, dtype=float)
        if len(vec) != self.n_params:
            raise ValueError(f"Expected a vector of length {self.n_params}, got {len(vec)}.")
        head = vec[self.weight_slice()]
        weights = np.append(head, 1 - np.sum(head))
        comps = [type(c).from_vector(vec[s], c.dim) for c, s in zip(self.components, self.component_slices())]
        return MixtureSpec(weights, comps)

    def param_names(self):
        names = [f'pi{j + 1}' for j in range(self.n_components - 1)]
        for j, c in enumerate(self.components):
            names += [f'c{j + 1}.{n}' for n in c.param_names()]
        return names

    def with_weights(self, weights):
        return MixtureSpec(weights, self.components)

    def log_component_densities(self, x):
        """(N, M) array of component log densities at a batch of observations."""
        return np.column_stack([np.atleast_1d(c.log_density(x)) for c in self.components])

    def classify(self, x):
        """Maximum-a-posteriori component index for each observation, ties to the lowest index."""
        log_post = safe_log(self.weights)[None, :] + self.log_component_densities(x)
        return np.argmax(log_post, axis=1)

    def unpack(self, theta):
        """Splits a global parameter vector into weights and component vectors (autograd compatible)."""
        head = theta[self.weight_slice()]
        weights = anp.concatenate([head, anp.reshape(1 - anp.sum(head), (1,))])
        return weights, [theta[s] for s in self.component_slices()]

    def __str__(self):
        my_str = f'MixtureSpec ({self.family}, M={self.n_components})\n'
        for j, (w, c) in enumerate(zip(self.weights, self.components)):
            my_str += f'{j + 1}\t{w:2.6f}\t{c}\n'
        return my_str


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Observed samples with ground-truth component indices and optional probabilistic labels.

    Component indices are zero-based. For regressors each sample is an (x, y) row.
    """
    samples: np.ndarray
    truth: np.ndarray = None
    plabels: np.ndarray = None

    def __post_init__(self):
        samples = np.array(self.samples, dtype=float)
        object.__setattr__(self, 'samples', samples)
        n = len(samples)
        if self.truth is not None:
            truth = np.array(self.truth, dtype=int).reshape(-1)
            if len(truth) != n:
                raise ValueError(f"{len(truth)} truth labels for {n} samples.")
            if np.any(truth < 0):
                raise ValueError("Truth labels have to be non-negative component indices.")
            object.__setattr__(self, 'truth', truth)
        if self.plabels is not None:
            plabels = np.array(self.plabels, dtype=float)
            if plabels.ndim != 2 or len(plabels) != n:
                raise ValueError(f"Probabilistic labels of shape {plabels.shape} do not match {n} samples.")
            if np.any(plabels < 0) or np.any(plabels > 1):
                raise ValueError("Probabilistic label entries have to lie in [0, 1].")
            if np.max(np.abs(plabels.sum(axis=1) - 1)) > 1e-9:
                raise ValueError("Probabilistic labels have to sum to one.")
            object.__setattr__(self, 'plabels', plabels)

    @property
    def n(self):
        return len(self.samples)

    def __len__(self):
        return self.n

    def with_plabels(self, plabels):
        return LabeledDataset(self.samples, self.truth, plabels)


def component_log_density(c, x):
    """Log density log f(x; theta) of a single component.

    Parameters
    ----------
    c : ComponentParams
        Component parameters.
    x : float or numpy.ndarray
        A single observation or a batch of observations.
    """
    return c.log_density(x)


def mixture_log_density(m, x):
    x_arr = np.asarray(x, dtype=float)
    single = x_arr.ndim == m.components[0].event_ndim
    res = logsumexp(safe_log(m.weights)[None, :] + m.log_component_densities(x), axis=1)
    return res[0] if single else res


def mixture_density(m, x):
    """Mixture density sum_j pi_j f_j(x; theta_j)."""
    return np.exp(mixture_log_density(m, x))


def component_score(c, x):
    """Gradient of log f with respect to the component parameters (in the family's ordering)."""
    return c.score(x)


def component_log_density_hessian(c, x):
    """Matrix of second partials of log f with respect to the component parameters."""
    return c.hessian(x)


def component_kl(a, b):
    """Kullback-Leibler divergence KL(a || b) of two components of the same family."""
    if type(a) is not type(b):
        raise FamilyMismatchError(f"Cannot compare {type(a).__name__} with {type(b).__name__}.")
    return a.kl(b)


def stratified_counts(weights, n):
    """Per-component counts proportional to weights (largest remainder rounding)."""
    raw = np.asarray(weights) * n
    counts = np.floor(raw).astype(int)
    remainder = n - counts.sum()
    order = np.argsort(-(raw - counts), kind='stable')
    counts[order[:remainder]] += 1
    return counts


def sample_mixture(m, n, rng, stratified=False, covariate_range=(-3.0, 3.0)):
    r'''Draws n iid samples from a mixture.

    Parameters
    ----------
    m : MixtureSpec
        Generating mixture.
    n : int
        Number of samples.
    rng : numpy.random.Generator
        Seeded generator, the result is deterministic for a fixed seed.
    stratified : bool
        If True the per-component counts are fixed to the (rounded) expected
        counts n * pi_j instead of being drawn from a multinomial, the order of
        the samples is still random.
    covariate_range : tuple
        Range of the uniform covariate distribution for regressor mixtures.

    Returns
    -------
    data : LabeledDataset
        Samples and generating component indices.
    '''
    if n < 1:
        raise ValueError("n has to be positive.")
    if stratified:
        truth = rng.permutation(np.repeat(np.arange(m.n_components), stratified_counts(m.weights, n)))
    else:
        truth = rng.choice(m.n_components, size=n, p=m.weights)
    if m.components[0].event_ndim == 0:
        samples = np.empty(n)
    else:
        samples = np.empty((n, m.components[0]._event_size))
    for j, c in enumerate(m.components):
        idx = np.where(truth == j)[0]
        if len(idx):
            samples[idx] = c.sample(len(idx), rng, covariate_range=covariate_range)
    return LabeledDataset(samples, truth)


def solve_param_for_kl(fixed, target_kl, partial, free_axis, rng, direction='forward', branch=None, max_expand=60):
    r'''Solves one parameter of a new component for a prescribed KL divergence to a fixed one.

    Parameters
    ----------
    fixed : ComponentParams
        Reference component.
    target_kl : float
        Target divergence, has to be positive.
    partial : ComponentParams
        New component with all parameters but the free one already drawn. The
        value of the free parameter is ignored.
    free_axis : str
        'mu' for (multivariate) normals, 'a' for Maxwell-Boltzmann components.
    rng : numpy.random.Generator
        Used for the choice between symmetric roots and for the direction of a
        multivariate mean offset.
    direction : str
        'forward' solves KL(new || fixed), 'reverse' solves KL(fixed || new).
    branch : str or None
        'upper' or 'lower' selects the root above or below the reference
        value, None picks one uniformly at random.
    max_expand : int
        Maximal number of bracket expansions before a NoRootError is raised.

    Returns
    -------
    component : ComponentParams
        `partial` with the free parameter replaced by the root.
    '''
    if target_kl <= 0:
        raise ValueError("target_kl has to be positive.")
    if type(fixed) is not type(partial):
        raise FamilyMismatchError(f"Cannot solve {type(partial).__name__} against {type(fixed).__name__}.")
    if isinstance(partial, LinearRegressor):
        raise UnsupportedFamilyError("KL separability is not defined for regressors.")
    if direction not in ('forward', 'reverse'):
        raise ValueError("direction has to be 'forward' or 'reverse'.")
    if branch not in (None, 'upper', 'lower'):
        raise ValueError("branch has to be 'upper', 'lower' or None.")

    def kl(new):
        return component_kl(new, fixed) if direction == 'forward' else component_kl(fixed, new)

    sign = {'upper': 1, 'lower': -1}.get(branch) or (1 if rng.random() < 0.5 else -1)

    if isinstance(partial, UnivariateNormal):
        if free_axis != 'mu':
            raise ValueError(f"Unsupported free axis '{free_axis}' for normal components.")

        def make(t):
            return UnivariateNormal(fixed.mu + sign * t, partial.sigma)
        scale = partial.sigma
    elif isinstance(partial, MultivariateNormal):
        if free_axis != 'mu':
            raise ValueError(f"Unsupported free axis '{free_axis}' for multivariate normal components.")
        unit = rng.normal(size=partial.dim)
        unit /= np.linalg.norm(unit)

        def make(t):
            return MultivariateNormal(fixed.mu + t * unit, partial.cov)
        scale = np.sqrt(np.max(np.diag(partial.cov)))
    elif isinstance(partial, MaxwellBoltzmann):
        if free_axis != 'a':
            raise ValueError(f"Unsupported free axis '{free_axis}' for Maxwell-Boltzmann components.")

        def make(t):
            return MaxwellBoltzmann(fixed.a * np.exp(sign * t))
        scale = 1.0
    else:
        raise UnsupportedFamilyError(f"Unsupported family '{partial.family}'.")

    if kl(make(0.0)) > target_kl:
        raise NoRootError(f"The minimal divergence {kl(make(0.0)):.6g} already exceeds the target {target_kl:.6g}.")
    t = find_bracketed_root(lambda t: kl(make(t)) - target_kl, 0.0, step=0.5 * scale, max_expand=max_expand)
    return make(t)


__all__ = ['ComponentParams', 'UnivariateNormal', 'MultivariateNormal', 'MaxwellBoltzmann', 'LinearRegressor', 'FAMILIES',
           'MixtureSpec', 'LabeledDataset', 'component_log_density', 'mixture_log_density', 'mixture_density',
           'component_score', 'component_log_density_hessian', 'component_kl', 'stratified_counts',
           'sample_mixture', 'solve_param_for_kl']
