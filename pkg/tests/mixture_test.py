import numpy as np
import camix as cx
import pytest
from hypothesis import given, settings, strategies as st

np.random.seed(0)


def _normal_mixture():
    return cx.MixtureSpec([0.3, 0.7], [cx.UnivariateNormal(-1.0, 0.5), cx.UnivariateNormal(2.0, 1.5)])


def test_spec_validation():
    with pytest.raises(ValueError):
        cx.MixtureSpec([0.5, 0.6], [cx.UnivariateNormal(0, 1), cx.UnivariateNormal(1, 1)])
    with pytest.raises(ValueError):
        cx.MixtureSpec([1.0], [cx.UnivariateNormal(0, 1), cx.UnivariateNormal(1, 1)])
    with pytest.raises(ValueError):
        cx.MixtureSpec([], [])
    with pytest.raises(cx.FamilyMismatchError):
        cx.MixtureSpec([0.5, 0.5], [cx.UnivariateNormal(0, 1), cx.MaxwellBoltzmann(1)])
    with pytest.raises(cx.FamilyMismatchError):
        cx.MixtureSpec([0.5, 0.5], [cx.MultivariateNormal([0], [[1]]), cx.MultivariateNormal([0, 0], np.eye(2))])
    with pytest.raises(TypeError):
        cx.MixtureSpec([1.0], [(0.0, 1.0)])
    single = cx.MixtureSpec([1.0], [cx.UnivariateNormal(0, 1)])
    assert single.n_params == 2
    zero = cx.MixtureSpec([0.0, 1.0], [cx.UnivariateNormal(0, 1), cx.UnivariateNormal(1, 1)])
    assert np.isfinite(cx.mixture_log_density(zero, 0.5))


def test_parameter_vector():
    m = _normal_mixture()
    assert m.n_params == 5
    assert np.allclose(m.to_vector(), [0.3, -1.0, 0.5, 2.0, 1.5])
    assert m.param_names() == ['pi1', 'c1.mu', 'c1.sigma', 'c2.mu', 'c2.sigma']
    assert np.allclose(m.from_vector(m.to_vector()).weights, m.weights)
    assert [s.start for s in m.component_slices()] == [1, 3]
    with pytest.raises(ValueError):
        m.from_vector(np.zeros(4))
    mvn = cx.MixtureSpec([0.5, 0.5], [cx.MultivariateNormal([0, 0], np.eye(2)), cx.MultivariateNormal([1, 1], np.eye(2))])
    assert mvn.n_params == 11
    assert np.allclose(mvn.from_vector(mvn.to_vector()).to_vector(), mvn.to_vector())
    str(m)


def test_mixture_density_normalized():
    m = _normal_mixture()
    assert np.isclose(cx.integrate.density_integral(m, -np.inf, np.inf), 1.0, rtol=1e-8)
    x = np.linspace(-3, 3, 7)
    manual = 0.3 * np.exp(m.components[0].log_density(x)) + 0.7 * np.exp(m.components[1].log_density(x))
    assert np.allclose(cx.mixture_density(m, x), manual)
    assert np.ndim(cx.mixture_log_density(m, 0.2)) == 0


def test_sample_mixture_reproducible():
    m = _normal_mixture()
    d1 = cx.sample_mixture(m, 300, np.random.default_rng(42))
    d2 = cx.sample_mixture(m, 300, np.random.default_rng(42))
    assert np.array_equal(d1.samples, d2.samples)
    assert np.array_equal(d1.truth, d2.truth)
    strat = cx.sample_mixture(m, 300, np.random.default_rng(1), stratified=True)
    assert np.array_equal(np.bincount(strat.truth), [90, 210])
    reg = cx.MixtureSpec([0.5, 0.5], [cx.LinearRegressor(0, 1, 1), cx.LinearRegressor(1, -1, 1)])
    data = cx.sample_mixture(reg, 50, np.random.default_rng(0), covariate_range=(0.0, 1.0))
    assert data.samples.shape == (50, 2)
    assert np.all((data.samples[:, 0] >= 0) & (data.samples[:, 0] <= 1))
    with pytest.raises(ValueError):
        cx.sample_mixture(m, 0, np.random.default_rng(0))


@given(st.lists(st.floats(0.01, 1.0), min_size=1, max_size=6), st.integers(1, 1000))
@settings(deadline=None)
def test_stratified_counts(raw, n):
    weights = np.array(raw) / np.sum(raw)
    counts = cx.stratified_counts(weights, n)
    assert counts.sum() == n
    assert np.all(np.abs(counts - weights * n) < 1)


def test_labeled_dataset_validation():
    with pytest.raises(ValueError):
        cx.LabeledDataset(np.zeros(3), truth=[0, 1])
    with pytest.raises(ValueError):
        cx.LabeledDataset(np.zeros(3), truth=[0, -1, 0])
    with pytest.raises(ValueError):
        cx.LabeledDataset(np.zeros(2), plabels=[[0.5, 0.6], [0.5, 0.5]])
    data = cx.LabeledDataset(np.zeros(2), truth=[0, 1])
    assert len(data) == 2
    assert data.with_plabels([[1, 0], [0, 1]]).plabels.shape == (2, 2)


def test_classify():
    m = _normal_mixture()
    assert np.array_equal(m.classify(np.array([-1.0, 2.0, 5.0])), [0, 1, 1])
    tie = cx.MixtureSpec([0.5, 0.5], [cx.UnivariateNormal(0, 1), cx.UnivariateNormal(0, 1)])
    assert np.array_equal(tie.classify(np.array([0.3])), [0])


def test_solve_param_for_kl_normal():
    rng = np.random.default_rng(7)
    fixed = cx.UnivariateNormal(0.4, 0.5)
    partial = cx.UnivariateNormal(0.0, 0.3)
    for direction in ['forward', 'reverse']:
        for target in [0.5, 2.0, 15.0]:
            new = cx.solve_param_for_kl(fixed, target, partial, 'mu', rng, direction=direction)
            kl = new.kl(fixed) if direction == 'forward' else fixed.kl(new)
            assert np.isclose(kl, target, rtol=1e-8)
            assert new.sigma == partial.sigma
    upper = cx.solve_param_for_kl(fixed, 1.0, partial, 'mu', rng, branch='upper')
    lower = cx.solve_param_for_kl(fixed, 1.0, partial, 'mu', rng, branch='lower')
    assert upper.mu > fixed.mu > lower.mu
    assert np.isclose(upper.mu - fixed.mu, fixed.mu - lower.mu)


def test_solve_param_for_kl_other_families():
    rng = np.random.default_rng(8)
    fixed = cx.MultivariateNormal([0.2, 0.1], [[0.3, 0.05], [0.05, 0.2]])
    partial = cx.MultivariateNormal([0.0, 0.0], [[0.2, 0.0], [0.0, 0.25]])
    new = cx.solve_param_for_kl(fixed, 2.5, partial, 'mu', rng)
    assert np.isclose(new.kl(fixed), 2.5, rtol=1e-8)
    assert np.array_equal(new.cov, partial.cov)

    fixed = cx.MaxwellBoltzmann(3.0)
    new = cx.solve_param_for_kl(fixed, 0.7, cx.MaxwellBoltzmann(1.0), 'a', rng, branch='upper')
    assert new.a > fixed.a
    assert np.isclose(new.kl(fixed), 0.7, rtol=1e-8)


def test_solve_param_for_kl_errors():
    rng = np.random.default_rng(0)
    fixed = cx.UnivariateNormal(0.0, 1.0)
    with pytest.raises(cx.NoRootError):
        cx.solve_param_for_kl(fixed, 0.5, cx.UnivariateNormal(0.0, 0.1), 'mu', rng)
    with pytest.raises(ValueError):
        cx.solve_param_for_kl(fixed, 0.0, cx.UnivariateNormal(0.0, 1.0), 'mu', rng)
    with pytest.raises(ValueError):
        cx.solve_param_for_kl(fixed, 1.0, cx.UnivariateNormal(0.0, 1.0), 'sigma', rng)
    with pytest.raises(cx.FamilyMismatchError):
        cx.solve_param_for_kl(fixed, 1.0, cx.MaxwellBoltzmann(1.0), 'a', rng)
    with pytest.raises(cx.UnsupportedFamilyError):
        reg = cx.LinearRegressor(0.0, 1.0, 1.0)
        cx.solve_param_for_kl(reg, 1.0, reg, 'beta0', rng)


def test_component_functions():
    assert np.isclose(cx.component_log_density(cx.UnivariateNormal(0.0, 1.0), 0.0), -0.918939, atol=1e-6)
    assert np.isclose(cx.component_log_density(cx.MaxwellBoltzmann(1.0), 1.0), -0.726576, atol=1e-6)
    assert np.isclose(cx.component_log_density(cx.LinearRegressor(0.0, 1.0, 1.0), [2.0, 2.0]), -0.5 * np.log(2 * np.pi))
    with pytest.raises(cx.DomainError):
        cx.component_log_density(cx.MaxwellBoltzmann(1.0), -1.0)
    m = cx.MixtureSpec([0.5, 0.5], [cx.UnivariateNormal(0.0, 1.0), cx.UnivariateNormal(1.0, 1.0)])
    assert np.isclose(cx.mixture_density(m, 0.5), 0.352065, atol=1e-6)
    comp = cx.UnivariateNormal(0.3, 1.2)
    x = np.random.normal(size=7)
    assert np.array_equal(cx.component_score(comp, x), comp.score(x))
    assert np.array_equal(cx.component_log_density_hessian(comp, x), comp.hessian(x))
    # the score vanishes on average at the generating parameters
    big = np.random.default_rng(4).normal(0.3, 1.2, size=200000)
    assert np.allclose(cx.component_score(comp, big).mean(axis=0), 0.0, atol=0.02)


def test_solve_param_for_kl_maxwell_example():
    new = cx.solve_param_for_kl(cx.MaxwellBoltzmann(1.0), 0.954443, cx.MaxwellBoltzmann(1.0), 'a',
                                np.random.default_rng(0), direction='reverse', branch='upper')
    assert np.isclose(new.a, 2.0, atol=1e-4)
