import numpy as np
import camix as cx
import pytest

np.random.seed(0)


def _problem(n=400, ne=0.5, seed=0):
    actual = cx.MixtureSpec([0.4, 0.6], [cx.UnivariateNormal(0.0, 1.0), cx.UnivariateNormal(3.0, 1.5)])
    data = cx.sample_mixture(actual, n, np.random.default_rng(seed))
    data = data.with_plabels(cx.make_context_labels(data.truth, 2, ne))
    init = cx.MixtureSpec([0.5, 0.5], [cx.UnivariateNormal(0.5, 1.2), cx.UnivariateNormal(2.0, 1.2)])
    return actual, data, init


def test_algorithm_parse():
    assert cx.Algorithm.parse('wca') is cx.Algorithm.WCA
    assert cx.Algorithm.parse(cx.Algorithm.S) is cx.Algorithm.S
    assert str(cx.Algorithm.DCA) == 'DCA'
    assert cx.Algorithm.CA.requires_plabels and not cx.Algorithm.US.requires_plabels
    assert not cx.Algorithm.CA.estimates_weights
    assert not cx.Algorithm.DCA.is_iterative
    with pytest.raises(ValueError):
        cx.Algorithm.parse('EM')


def test_fit_config():
    with pytest.raises(ValueError):
        cx.FitConfig(tol=0)
    with pytest.raises(ValueError):
        cx.FitConfig(max_iter=0)
    with pytest.raises(ValueError):
        cx.FitConfig(m_step_regularization=-1)
    with pytest.raises(ValueError):
        cx.FitConfig(iter_budget_ms=0)
    _, _, init = _problem()
    with pytest.raises(ValueError):
        cx.FitConfig(free_mask=(True, False)).mask_for(init)
    assert cx.FitConfig(free_mask=[1, 0, 1, 1, 1]).free_mask == (True, False, True, True, True)


def test_e_step_rows():
    _, data, init = _problem()
    for alg in ['US', 'S', 'CA', 'WCA', 'DCA']:
        resp = cx.e_step(alg, init, data)
        assert resp.shape == (data.n, 2)
        assert np.allclose(resp.sum(axis=1), 1.0)
    s = cx.e_step('S', init, data)
    assert np.array_equal(np.argmax(s, axis=1), data.truth)
    assert np.all(np.max(s, axis=1) == 1)
    assert np.allclose(cx.e_step('DCA', init, data), data.plabels)


def test_e_step_ignorant_labels():
    _, data, init = _problem(ne=0.0)
    assert np.array_equal(cx.e_step('WCA', init, data), cx.e_step('US', init, data))
    equal = init.with_weights([0.5, 0.5])
    assert np.allclose(cx.e_step('CA', equal, data), cx.e_step('US', equal, data))


def test_e_step_one_hot_labels():
    _, data, init = _problem()
    one_hot = np.eye(2)[data.truth]
    for alg in ['CA', 'WCA']:
        assert np.array_equal(cx.e_step(alg, init, data, plabels=one_hot), cx.e_step('S', init, data))


def test_e_step_unnormalized_labels():
    _, data, init = _problem()
    assert np.allclose(cx.e_step('WCA', init, data, plabels=3 * data.plabels), cx.e_step('WCA', init, data))


def test_label_validation():
    actual, data, init = _problem()
    bare = cx.LabeledDataset(data.samples)
    with pytest.raises(ValueError):
        cx.e_step('CA', init, bare)
    with pytest.raises(ValueError):
        cx.e_step('S', init, bare)
    with pytest.raises(ValueError):
        cx.e_step('CA', init, data, plabels=np.ones((3, 2)))
    with pytest.raises(ValueError):
        cx.e_step('WCA', init, data, plabels=np.zeros((data.n, 2)))
    with pytest.raises(ValueError):
        cx.e_step('CA', init, data, plabels=-data.plabels)
    assert np.isfinite(cx.incomplete_loglik('US', init, bare))


def test_m_step():
    _, data, init = _problem()
    resp = cx.e_step('S', init, data)
    m = cx.m_step('normal', data, resp)
    for j in range(2):
        x = data.samples[data.truth == j]
        assert np.isclose(m.components[j].mu, np.mean(x))
        assert np.isclose(m.components[j].sigma, np.std(x))
    assert np.allclose(m.weights, np.bincount(data.truth) / data.n)
    kept = cx.m_step(cx.UnivariateNormal, data, resp, current=init, update_weights=False)
    assert np.array_equal(kept.weights, init.weights)
    masked = cx.m_step('normal', data, resp, cx.FitConfig(free_mask=(True, False, True, True, True)), current=init)
    assert masked.components[0].mu == init.components[0].mu
    resp[:, 1] = 0.0
    resp[:, 0] = 1.0
    with pytest.raises(cx.DegenerateComponentError) as err:
        cx.m_step('normal', data, resp)
    assert err.value.component == 1
    with pytest.raises(ValueError):
        cx.m_step('cauchy', data, resp)
    with pytest.raises(TypeError):
        cx.m_step(3, data, resp)


def test_fit_recovers_parameters():
    actual, data, init = _problem(n=3000, ne=0.9)
    for alg in ['US', 'S', 'CA', 'WCA', 'DCA']:
        res = cx.fit(alg, data, init, silent=True)
        assert res.converged
        for est, act in zip(res.spec.components, actual.components):
            assert abs(est.mu - act.mu) < 0.25
    res = cx.fit('US', data, init, silent=True)
    assert len(res) == actual.n_params
    assert res[0] == res.theta[0]
    assert 'US fit' in str(res)
    repr(res)


def test_fit_single_step_estimators():
    _, data, init = _problem()
    res = cx.fit('DCA', data, init, silent=True)
    assert res.iterations == 1
    assert len(res.theta_trace) == 2
    w = data.plabels[:, 0]
    assert np.isclose(res.spec.components[0].mu, np.average(data.samples, weights=w))
    assert np.allclose(res.spec.weights, data.plabels.mean(axis=0))
    res = cx.fit('S', data, init, silent=True)
    assert np.allclose(res.spec.weights, np.bincount(data.truth) / data.n)


def test_fit_monotone_ascent():
    _, data, init = _problem(ne=0.3)
    for alg in ['US', 'CA', 'WCA']:
        res = cx.fit(alg, data, init, silent=True)
        logl = [cx.incomplete_loglik(alg, init.from_vector(theta), data) for theta in res.theta_trace]
        assert np.all(np.diff(logl) >= -1e-8)


def test_ca_weights():
    _, data, init = _problem(ne=0.3)
    res = cx.fit('CA', data, init, silent=True)
    assert np.allclose(res.spec.weights, cx.ca_mixing_estimator(data.plabels))
    assert np.allclose(res.theta_trace[-1][0], init.weights[0])
    assert np.allclose(cx.ca_mixing_estimator([[0.5, 0.5], [0.2, 0.8]]), [0.5, 0.5])
    masked = cx.fit('CA', data, init, cx.FitConfig(free_mask=(False, True, True, True, True)), silent=True)
    assert np.array_equal(masked.spec.weights, init.weights)


def test_fit_free_mask():
    _, data, init = _problem()
    config = cx.FitConfig(free_mask=(False, True, False, True, False))
    res = cx.fit('US', data, init, config, silent=True)
    assert res.spec.weights[0] == init.weights[0]
    assert res.spec.components[0].sigma == init.components[0].sigma
    assert res.spec.components[1].sigma == init.components[1].sigma


def test_fit_output_and_warnings(capsys):
    _, data, init = _problem()
    with pytest.warns(RuntimeWarning):
        res = cx.fit('US', data, init, cx.FitConfig(max_iter=1))
    assert not res.converged
    assert res.iterations == 1
    assert 'US fit with 5 free parameters' in capsys.readouterr().out
    cx.fit('US', data, init, cx.FitConfig(max_iter=1), silent=True)
    assert capsys.readouterr().out == ''


def test_iteration_budget():
    _, data, init = _problem()
    res = cx.fit('US', data, init, cx.FitConfig(tol=1e-300, iter_budget_ms=1e-6), silent=True)
    assert res.iterations == 1
    assert not res.converged


def test_q_and_entropy():
    _, data, init = _problem(ne=0.4)
    other = cx.MixtureSpec([0.3, 0.7], [cx.UnivariateNormal(-0.5, 0.8), cx.UnivariateNormal(2.5, 2.0)])
    for alg in ['US', 'CA', 'WCA']:
        q, h = cx.q_and_entropy(alg, init, init, data)
        assert np.isclose(q + h, cx.incomplete_loglik(alg, init, data))
        q, h = cx.q_and_entropy(alg, init, other, data)
        assert q + h <= cx.incomplete_loglik(alg, other, data) + 1e-9


def test_loglik_variants():
    _, data, init = _problem()
    us = cx.incomplete_loglik('US', init, data)
    assert cx.incomplete_loglik('S', init, data) == us
    assert cx.incomplete_loglik('DCA', init, data) == us
    vec = cx.loglik_from_vector('WCA', init, init.to_vector(), data.samples, data.plabels)
    assert np.isclose(vec, cx.incomplete_loglik('WCA', init, data))
    vec = cx.loglik_from_vector('CA', init, init.to_vector(), data.samples, data.plabels)
    assert np.isclose(vec, cx.incomplete_loglik('CA', init, data))


def test_map_classify():
    actual, data, _ = _problem()
    assert np.array_equal(cx.map_classify(actual, data.samples), actual.classify(data.samples))


def test_ca_mixing_estimator_counts():
    assert np.allclose(cx.ca_mixing_estimator([[0.9, 0.05, 0.05]] * 4), [1.0, 0.0, 0.0])
    labels = [[0.8, 0.2]] * 6 + [[0.3, 0.7]] * 4
    assert np.allclose(cx.ca_mixing_estimator(labels), [0.6, 0.4])
    assert np.array_equal(cx.ca_mixing_estimator(np.full((5, 3), 1 / 3)), [1.0, 0.0, 0.0])


def test_one_hot_labels_reproduce_supervised_fit():
    for seed in range(5):
        _, data, init = _problem(seed=seed)
        labelled = data.with_plabels(np.eye(2)[data.truth])
        supervised = cx.fit('S', labelled, init, silent=True)
        for alg in ['CA', 'WCA', 'DCA']:
            res = cx.fit(alg, labelled, init, silent=True)
            assert np.linalg.norm(res.theta - supervised.theta) < 1e-9
        for alg in ['CA', 'WCA']:
            res = cx.fit(alg, labelled, init, silent=True)
            assert cx.info_matrices(alg, res.spec, labelled).r_prime == 1.0


def test_ignorant_labels_reproduce_unsupervised_trajectory():
    for seed in range(5):
        _, data, init = _problem(ne=0.0, seed=seed)
        us = cx.fit('US', data, init, silent=True)
        wca = cx.fit('WCA', data, init, silent=True)
        assert us.iterations == wca.iterations
        assert len(us.theta_trace) == len(wca.theta_trace)
        for a, b in zip(us.theta_trace, wca.theta_trace):
            assert np.linalg.norm(a - b) < 1e-12
