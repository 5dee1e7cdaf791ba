import numpy as np
import camix as cx
import pytest

np.random.seed(0)


def _data(n=150, ne=0.3):
    actual = cx.MixtureSpec([0.35, 0.65], [cx.UnivariateNormal(-0.5, 0.8), cx.UnivariateNormal(1.5, 1.2)])
    data = cx.sample_mixture(actual, n, np.random.default_rng(11))
    return actual, data.with_plabels(cx.make_context_labels(data.truth, 2, ne))


def test_louis_identity():
    actual, data = _data()
    point = cx.MixtureSpec([0.45, 0.55], [cx.UnivariateNormal(-0.2, 1.1), cx.UnivariateNormal(1.0, 0.9)])
    for m in [actual, point]:
        for alg in ['US', 'CA', 'WCA']:
            info = cx.info_matrices(alg, m, data)
            auto = cx.observed_info(alg, m, data)
            assert info.i_obs.shape == auto.shape
            assert np.allclose(info.i_obs, auto, rtol=1e-6, atol=1e-8)


def test_louis_identity_maxwell():
    actual = cx.MixtureSpec([0.5, 0.5], [cx.MaxwellBoltzmann(1.0), cx.MaxwellBoltzmann(3.0)])
    data = cx.sample_mixture(actual, 120, np.random.default_rng(4))
    data = data.with_plabels(cx.make_context_labels(data.truth, 2, 0.5))
    for alg in ['US', 'WCA']:
        assert np.allclose(cx.info_matrices(alg, actual, data).i_obs, cx.observed_info(alg, actual, data), rtol=1e-6, atol=1e-8)


def test_numerical_observed_info():
    actual, data = _data(n=60)
    auto = cx.observed_info('US', actual, data)
    num = cx.finite_difference_observed_info('US', actual, data)
    assert np.allclose(auto, num, rtol=1e-4, atol=1e-4)


def test_free_mask_and_ca_reduction():
    actual, data = _data()
    idx, names = cx.param_indices('CA', actual)
    assert 'pi1' not in names
    assert list(idx) == [1, 2, 3, 4]
    info = cx.info_matrices('CA', actual, data)
    assert info.reduced
    assert info.i_c.shape == (4, 4)
    assert info.param_index == ('c1.mu', 'c1.sigma', 'c2.mu', 'c2.sigma')
    mask = (True, True, False, True, False)
    info = cx.info_matrices('US', actual, data, free_mask=mask)
    assert info.param_index == ('pi1', 'c1.mu', 'c2.mu')
    assert np.allclose(info.i_obs, cx.observed_info('US', actual, data, free_mask=mask), rtol=1e-6, atol=1e-8)


def test_complete_info_structure():
    actual, data = _data()
    resp = cx.e_step('US', actual, data)
    i_c = cx.complete_info('US', actual, data, resp)
    assert np.allclose(i_c, i_c.T)
    sums = resp.sum(axis=0)
    assert np.isclose(i_c[0, 0], sums[0] / 0.35 ** 2 + sums[1] / 0.65 ** 2)
    assert np.all(i_c[1:3, 3:5] == 0)
    assert np.isclose(i_c[1, 1], sums[0] / 0.8 ** 2)
    with pytest.raises(ValueError):
        cx.complete_info('US', actual, data, resp[:10])


def test_supervised_has_no_missing_information():
    actual, data = _data()
    info = cx.info_matrices('S', actual, data)
    assert np.all(info.i_m == 0)
    assert np.isclose(info.r_prime, 1.0)
    assert np.allclose(info.se, np.sqrt(np.diag(np.linalg.inv(info.i_c))))
    assert info.regular


def test_rate_at_estimate():
    actual, data = _data(n=600)
    init = cx.MixtureSpec([0.5, 0.5], [cx.UnivariateNormal(-1.0, 1.0), cx.UnivariateNormal(2.0, 1.0)])
    for alg in ['US', 'CA', 'WCA']:
        res = cx.fit(alg, data, init, silent=True)
        info = cx.info_matrices(alg, res.spec, data)
        assert 0 < info.spectral_radius < 1
        assert np.isclose(info.r_prime, 1 - info.spectral_radius)
        assert np.all(info.se > 0)
        assert np.allclose(info.covariance @ info.i_obs, np.eye(len(info.i_obs)), atol=1e-8)


def test_more_context_converges_faster():
    actual, data = _data(n=600, ne=0.2)
    sharp = data.with_plabels(cx.make_context_labels(data.truth, 2, 0.8))
    weak = cx.info_matrices('CA', actual, data)
    strong = cx.info_matrices('CA', actual, sharp)
    assert strong.r_prime > weak.r_prime


def test_mip_assemble():
    with pytest.warns(RuntimeWarning):
        info = cx.mip_assemble([[1.0, 1.0], [1.0, 1.0]], np.zeros((2, 2)), ('a', 'b'))
    assert info.singular
    assert not info.regular
    assert np.isnan(info.r_prime)
    assert np.all(np.isnan(info.se))
    info = cx.mip_assemble(np.diag([4.0, 1.0]), np.diag([1.0, 0.5]))
    assert np.isclose(info.spectral_radius, 0.5)
    assert np.allclose(info.se, [1 / np.sqrt(3), np.sqrt(2)])
    with pytest.warns(RuntimeWarning):
        info = cx.mip_assemble(np.diag([1.0, 1.0]), np.diag([2.0, 0.5]))
    assert not info.regular
    with pytest.raises(ValueError):
        cx.mip_assemble(np.eye(2), np.eye(3))


def test_missing_info_direct():
    actual, data = _data()
    one_hot = np.eye(2)[data.truth]
    assert np.all(cx.missing_info('US', actual, data, one_hot) == 0)
    resp = cx.e_step('WCA', actual, data)
    i_m = cx.missing_info('WCA', actual, data, resp)
    assert i_m.shape == (5, 5)
    assert np.allclose(i_m, i_m.T)
    assert np.all(np.linalg.eigvalsh(i_m) > -1e-9)
    assert cx.missing_info('CA', actual, data, resp).shape == (4, 4)
    with pytest.raises(ValueError):
        cx.missing_info('US', actual, data, resp[:, :1])


def test_missing_information_decreases_with_context():
    setup = cx.experiments.MipSetup()
    data = cx.sample_mixture(setup.actual(), 10 ** 4, np.random.default_rng(3))
    estimate = setup.actual()
    one_hot = np.eye(2)[data.truth]
    for alg in ['CA', 'WCA']:
        traces = []
        for ne in [0.0, 0.2, 0.4, 0.6, 0.8, 0.99]:
            plabels = cx.make_context_labels(data.truth, 2, ne)
            resp = cx.e_step(alg, estimate, data, plabels)
            traces.append(np.trace(cx.missing_info(alg, estimate, data, resp)))
        assert np.all(np.diff(traces) < 0)
        resp = cx.e_step(alg, estimate, data, one_hot)
        i_c = cx.complete_info(alg, estimate, data, resp)
        assert np.trace(cx.missing_info(alg, estimate, data, resp)) < 1e-6 * np.trace(i_c)


def test_late_iteration_ratio_matches_spectral_radius():
    config = cx.FitConfig(tol=1e-13, max_iter=5000)
    init = cx.MixtureSpec([0.5, 0.5], [cx.UnivariateNormal(-1.0, 1.0), cx.UnivariateNormal(2.0, 1.0)])
    actual = cx.MixtureSpec([0.35, 0.65], [cx.UnivariateNormal(-0.5, 0.8), cx.UnivariateNormal(1.5, 1.2)])
    for seed, ne in [(1, 0.0), (2, 0.3), (3, 0.6)]:
        data = cx.sample_mixture(actual, 500, np.random.default_rng(seed))
        data = data.with_plabels(cx.make_context_labels(data.truth, 2, ne))
        for alg in ['US', 'CA', 'WCA']:
            res = cx.fit(alg, data, init, config, silent=True)
            steps = np.linalg.norm(np.diff(np.array(res.theta_trace), axis=0), axis=1)
            late = np.where(steps > 1e-8)[0][-1]
            assert late >= 2
            info = cx.info_matrices(alg, res.spec, data)
            assert abs(steps[late] / steps[late - 1] - info.spectral_radius) < 0.05
