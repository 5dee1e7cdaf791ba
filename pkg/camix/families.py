import functools
from dataclasses import dataclass
import numpy as np
import autograd.numpy as anp
from .exceptions import DomainError, SingularCovarianceError, FamilyMismatchError, UnsupportedFamilyError
from .linalg import is_positive_definite


LOG_2PI = np.log(2 * np.pi)


@functools.lru_cache(maxsize=None)
def _sym_basis(dim):
    """Symmetric basis matrices E_k for the lower-triangular covariance entries in column-major order."""
    c, r = np.triu_indices(dim)
    basis = np.zeros((len(r), dim, dim))
    for k, (i, j) in enumerate(zip(r, c)):
        basis[k, i, j] = 1.0
        basis[k, j, i] = 1.0
    basis.setflags(write=False)
    return basis


def _lower_entries(dim):
    c, r = np.triu_indices(dim)
    return r, c


class ComponentParams:
    """Parameters of a single mixture component.

    Subclasses fix the family and define the parameter ordering used by
    `to_vector`, `score` and `hessian`.
    """

    family = None
    event_ndim = 0

    @property
    def n_params(self):
        return len(self.to_vector())

    @property
    def dim(self):
        return 1

    def to_vector(self):
        raise NotImplementedError

    @classmethod
    def from_vector(cls, vec, dim=None):
        raise NotImplementedError

    def param_names(self):
        raise NotImplementedError

    @classmethod
    def logpdf_from_vector(cls, theta, x):
        """Log density of a batch of observations x as an autograd-differentiable function of theta."""
        raise NotImplementedError

    def _as_batch(self, x):
        x = np.asarray(x, dtype=float)
        if self.event_ndim == 0:
            single = x.ndim == 0
            batch = np.atleast_1d(x)
            if batch.ndim != 1:
                raise ValueError(f"Expected scalar observations, got shape {x.shape}.")
        else:
            single = x.ndim == 1
            batch = np.atleast_2d(x)
            if batch.ndim != 2 or batch.shape[1] != self._event_size:
                raise ValueError(f"Expected observations of size {self._event_size}, got shape {x.shape}.")
        self._check_support(batch)
        return batch, single

    def _check_support(self, batch):
        if not np.all(np.isfinite(batch)):
            raise DomainError("Observations have to be finite.")

    def log_density(self, x):
        """Log density at a single observation or a batch of observations."""
        batch, single = self._as_batch(x)
        res = np.asarray(self.logpdf_from_vector(self.to_vector(), batch))
        return res[0] if single else res

    def score(self, x):
        """Gradient of the log density with respect to the component parameters."""
        batch, single = self._as_batch(x)
        res = self._score(batch)
        return res[0] if single else res

    def hessian(self, x):
        """Matrix of second derivatives of the log density with respect to the component parameters."""
        batch, single = self._as_batch(x)
        res = self._hessian(batch)
        return res[0] if single else res

    def _check_same_family(self, other):
        if type(self) is not type(other):
            raise FamilyMismatchError(f"Cannot compare {type(self).__name__} with {type(other).__name__}.")
        if self.dim != other.dim:
            raise FamilyMismatchError(f"Dimension mismatch: {self.dim} vs {other.dim}.")

    def kl(self, other):
        raise UnsupportedFamilyError(f"No KL divergence for family '{self.family}'.")


@dataclass(frozen=True)
class UnivariateNormal(ComponentParams):
    """Univariate normal component, parameters ordered (mu, sigma)."""
    mu: float
    sigma: float

    family = 'normal'

    def __post_init__(self):
        object.__setattr__(self, 'mu', float(self.mu))
        object.__setattr__(self, 'sigma', float(self.sigma))
        if not np.isfinite(self.mu):
            raise DomainError("mu has to be finite.")
        if not (np.isfinite(self.sigma) and self.sigma > 0):
            raise DomainError("sigma has to be positive.")

    def to_vector(self):
        return np.array([self.mu, self.sigma])

    @classmethod
    def from_vector(cls, vec, dim=None):
        return cls(vec[0], vec[1])

    def param_names(self):
        return ['mu', 'sigma']

    @classmethod
    def logpdf_from_vector(cls, theta, x):
        z = (x - theta[0]) / theta[1]
        return -0.5 * LOG_2PI - anp.log(theta[1]) - 0.5 * z ** 2

    def _score(self, x):
        r = x - self.mu
        s = self.sigma
        return np.column_stack([r / s ** 2, -1 / s + r ** 2 / s ** 3])

    def _hessian(self, x):
        r = x - self.mu
        s = self.sigma
        res = np.empty((len(x), 2, 2))
        res[:, 0, 0] = -1 / s ** 2
        res[:, 0, 1] = res[:, 1, 0] = -2 * r / s ** 3
        res[:, 1, 1] = 1 / s ** 2 - 3 * r ** 2 / s ** 4
        return res

    def sample(self, n, rng, **kwargs):
        return rng.normal(self.mu, self.sigma, size=n)

    def kl(self, other):
        self._check_same_family(other)
        return (np.log(other.sigma / self.sigma)
                + (self.sigma ** 2 + (self.mu - other.mu) ** 2) / (2 * other.sigma ** 2) - 0.5)

    @classmethod
    def fit_weighted(cls, x, w, ridge=1e-8):
        sw = np.sum(w)
        mu = np.dot(w, x) / sw
        var = np.dot(w, (x - mu) ** 2) / sw
        return cls(mu, np.sqrt(max(var, ridge)))


@dataclass(frozen=True, eq=False)
class MultivariateNormal(ComponentParams):
    """Multivariate normal component.

    Parameters are ordered as the mean entries followed by the lower-triangular
    covariance entries in column-major order, e.g. (mu0, mu1, cov00, cov10, cov11)
    in two dimensions.
    """
    mu: np.ndarray
    cov: np.ndarray

    family = 'mvnormal'
    event_ndim = 1

    def __post_init__(self):
        mu = np.array(self.mu, dtype=float).reshape(-1)
        cov = np.array(self.cov, dtype=float)
        if cov.shape != (len(mu), len(mu)):
            raise ValueError(f"Covariance of shape {cov.shape} does not match mean of length {len(mu)}.")
        if not np.all(np.isfinite(mu)):
            raise DomainError("mu has to be finite.")
        if not is_positive_definite(cov):
            raise SingularCovarianceError("Covariance matrix is not symmetric positive definite.")
        mu.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, 'mu', mu)
        object.__setattr__(self, 'cov', cov)

    def __eq__(self, other):
        return isinstance(other, MultivariateNormal) and np.array_equal(self.mu, other.mu) and np.array_equal(self.cov, other.cov)

    __hash__ = None

    @property
    def dim(self):
        return len(self.mu)

    @property
    def _event_size(self):
        return self.dim

    def to_vector(self):
        r, c = _lower_entries(self.dim)
        return np.concatenate([self.mu, self.cov[r, c]])

    @classmethod
    def from_vector(cls, vec, dim=None):
        vec = np.asarray(vec, dtype=float)
        if dim is None:
            dim = int(round((-3 + np.sqrt(9 + 8 * len(vec))) / 2))
        if len(vec) != dim + dim * (dim + 1) // 2:
            raise ValueError(f"Vector of length {len(vec)} does not describe a {dim}-dimensional normal.")
        cov = np.tensordot(vec[dim:], _sym_basis(dim), axes=1)
        return cls(vec[:dim], cov)

    def param_names(self):
        r, c = _lower_entries(self.dim)
        return [f'mu[{i}]' for i in range(self.dim)] + [f'cov[{i},{j}]' for i, j in zip(r, c)]

    @classmethod
    def logpdf_from_vector(cls, theta, x):
        dim = x.shape[1]
        cov = anp.tensordot(theta[dim:], _sym_basis(dim), axes=1)
        r = x - theta[:dim]
        sol = anp.linalg.solve(cov, anp.transpose(r))
        quad = anp.sum(anp.transpose(r) * sol, axis=0)
        logdet = anp.linalg.slogdet(cov)[1]
        return -0.5 * (dim * LOG_2PI + logdet + quad)

    def _parts(self, x):
        basis = _sym_basis(self.dim)
        prec = np.linalg.inv(self.cov)
        u = (x - self.mu) @ prec
        v = np.einsum('kab,nb->nka', basis, u)
        return basis, prec, u, v

    def _score(self, x):
        basis, prec, u, v = self._parts(x)
        tr_pe = np.einsum('ab,kba->k', prec, basis)
        s_cov = 0.5 * (np.einsum('nka,na->nk', v, u) - tr_pe)
        return np.concatenate([u, s_cov], axis=1)

    def _hessian(self, x):
        basis, prec, u, v = self._parts(x)
        d = self.dim
        k = basis.shape[0]
        pe = np.einsum('ab,kbc->kac', prec, basis)
        const = 0.5 * np.einsum('lab,kba->kl', pe, pe)
        res = np.empty((len(x), d + k, d + k))
        res[:, :d, :d] = -prec
        mu_cov = -np.einsum('ab,nlb->nal', prec, v)
        res[:, :d, d:] = mu_cov
        res[:, d:, :d] = np.transpose(mu_cov, (0, 2, 1))
        res[:, d:, d:] = const - np.einsum('nka,ab,nlb->nkl', v, prec, v)
        return res

    def sample(self, n, rng, **kwargs):
        return rng.multivariate_normal(self.mu, self.cov, size=n)

    def kl(self, other):
        self._check_same_family(other)
        prec2 = np.linalg.inv(other.cov)
        diff = other.mu - self.mu
        logdet1 = np.linalg.slogdet(self.cov)[1]
        logdet2 = np.linalg.slogdet(other.cov)[1]
        return 0.5 * (np.trace(prec2 @ self.cov) + diff @ prec2 @ diff - self.dim + logdet2 - logdet1)

    @classmethod
    def fit_weighted(cls, x, w, ridge=1e-8):
        sw = np.sum(w)
        mu = w @ x / sw
        r = x - mu
        cov = (w[:, None] * r).T @ r / sw + ridge * np.eye(x.shape[1])
        return cls(mu, 0.5 * (cov + cov.T))

    @classmethod
    def fit_weighted_shared(cls, x, resp, ridge=1e-8):
        """Weighted means per component with a single pooled covariance (LDA)."""
        sw = resp.sum(axis=0)
        means = (resp.T @ x) / sw[:, None]
        cov = np.zeros((x.shape[1], x.shape[1]))
        for j in range(resp.shape[1]):
            r = x - means[j]
            cov += (resp[:, j][:, None] * r).T @ r
        cov = cov / resp.sum() + ridge * np.eye(x.shape[1])
        cov = 0.5 * (cov + cov.T)
        return [cls(m, cov) for m in means]


@dataclass(frozen=True)
class MaxwellBoltzmann(ComponentParams):
    """Maxwell-Boltzmann component with scale a, supported on x > 0."""
    a: float

    family = 'maxwell'

    def __post_init__(self):
        object.__setattr__(self, 'a', float(self.a))
        if not (np.isfinite(self.a) and self.a > 0):
            raise DomainError("a has to be positive.")

    def _check_support(self, batch):
        super()._check_support(batch)
        if np.any(batch <= 0):
            raise DomainError("Maxwell-Boltzmann observations have to be positive.")

    def to_vector(self):
        return np.array([self.a])

    @classmethod
    def from_vector(cls, vec, dim=None):
        return cls(vec[0])

    def param_names(self):
        return ['a']

    @classmethod
    def logpdf_from_vector(cls, theta, x):
        a = theta[0]
        return 0.5 * np.log(2 / np.pi) + 2 * anp.log(x) - x ** 2 / (2 * a ** 2) - 3 * anp.log(a)

    def _score(self, x):
        a = self.a
        return (-3 / a + x ** 2 / a ** 3)[:, None]

    def _hessian(self, x):
        a = self.a
        return (3 / a ** 2 - 3 * x ** 2 / a ** 4)[:, None, None]

    def sample(self, n, rng, **kwargs):
        return np.linalg.norm(rng.normal(0.0, self.a, size=(n, 3)), axis=1)

    def kl(self, other):
        self._check_same_family(other)
        return 3 * np.log(other.a / self.a) + 1.5 * (self.a ** 2 / other.a ** 2 - 1)

    @classmethod
    def fit_weighted(cls, x, w, ridge=1e-8):
        a2 = np.dot(w, x ** 2) / (3 * np.sum(w))
        return cls(np.sqrt(max(a2, ridge)))


@dataclass(frozen=True)
class LinearRegressor(ComponentParams):
    """First order linear regressor y = beta0 + beta1 * x + N(0, eps^2).

    Observations are (x, y) pairs; the density is the conditional density of y given x.
    """
    beta0: float
    beta1: float
    eps: float

    family = 'regressor'
    event_ndim = 1
    _event_size = 2

    def __post_init__(self):
        for name in ['beta0', 'beta1', 'eps']:
            object.__setattr__(self, name, float(getattr(self, name)))
        if not (np.isfinite(self.beta0) and np.isfinite(self.beta1)):
            raise DomainError("Regression coefficients have to be finite.")
        if not (np.isfinite(self.eps) and self.eps > 0):
            raise DomainError("eps has to be positive.")

    def to_vector(self):
        return np.array([self.beta0, self.beta1, self.eps])

    @classmethod
    def from_vector(cls, vec, dim=None):
        return cls(vec[0], vec[1], vec[2])

    def param_names(self):
        return ['beta0', 'beta1', 'eps']

    @classmethod
    def logpdf_from_vector(cls, theta, x):
        z = (x[:, 1] - theta[0] - theta[1] * x[:, 0]) / theta[2]
        return -0.5 * LOG_2PI - anp.log(theta[2]) - 0.5 * z ** 2

    def residuals(self, x):
        return x[:, 1] - self.beta0 - self.beta1 * x[:, 0]

    def predict(self, covariate):
        return self.beta0 + self.beta1 * np.asarray(covariate, dtype=float)

    def _score(self, x):
        r = self.residuals(x)
        e = self.eps
        return np.column_stack([r / e ** 2, r * x[:, 0] / e ** 2, -1 / e + r ** 2 / e ** 3])

    def _hessian(self, x):
        r = self.residuals(x)
        cv = x[:, 0]
        e = self.eps
        res = np.empty((len(x), 3, 3))
        res[:, 0, 0] = -1 / e ** 2
        res[:, 0, 1] = res[:, 1, 0] = -cv / e ** 2
        res[:, 1, 1] = -cv ** 2 / e ** 2
        res[:, 0, 2] = res[:, 2, 0] = -2 * r / e ** 3
        res[:, 1, 2] = res[:, 2, 1] = -2 * r * cv / e ** 3
        res[:, 2, 2] = 1 / e ** 2 - 3 * r ** 2 / e ** 4
        return res

    def sample(self, n, rng, covariate_range=(-3.0, 3.0), **kwargs):
        cv = rng.uniform(*covariate_range, size=n)
        y = self.beta0 + self.beta1 * cv + rng.normal(0.0, self.eps, size=n)
        return np.column_stack([cv, y])

    def kl(self, other):
        self._check_same_family(other)
        raise UnsupportedFamilyError("KL divergence is not defined for regressors.")

    @classmethod
    def fit_weighted(cls, x, w, ridge=1e-8):
        sw = np.sqrt(w)
        design = np.column_stack([np.ones(len(x)), x[:, 0]])
        beta = np.linalg.lstsq(design * sw[:, None], x[:, 1] * sw, rcond=None)[0]
        r = x[:, 1] - design @ beta
        var = np.dot(w, r ** 2) / np.sum(w)
        return cls(beta[0], beta[1], np.sqrt(max(var, ridge)))


FAMILIES = {cls.family: cls for cls in [UnivariateNormal, MultivariateNormal, MaxwellBoltzmann, LinearRegressor]}
