import numpy as np
import camix as cx
import pytest
from hypothesis import given, settings, strategies as st

np.random.seed(0)


def test_negentropy_extremes():
    assert np.isclose(cx.negentropy([0.25, 0.25, 0.25, 0.25]), 0.0)
    assert cx.negentropy([0.0, 1.0, 0.0]) == 1
    assert cx.negentropy([1.0]) == 1
    rows = cx.negentropy(np.array([[0.5, 0.5], [1.0, 0.0]]))
    assert np.allclose(rows, [0.0, 1.0])
    assert 0 < cx.negentropy([0.7, 0.3]) < 1


@given(st.floats(0.0, 0.99), st.integers(2, 8), st.data())
@settings(deadline=None, max_examples=60)
def test_make_label(ne, m, data):
    top = data.draw(st.integers(0, m - 1))
    label = cx.make_label(ne, m, top)
    assert np.isclose(np.sum(label), 1.0)
    assert np.isclose(cx.negentropy(label), ne, atol=1e-9)
    assert label[top] == np.max(label)
    others = np.delete(label, top)
    assert np.allclose(others, others[0])


def test_make_label_edge_cases():
    assert np.allclose(cx.make_label(0.0, 4, 2), 0.25)
    assert np.isclose(cx.peaked_mass(0.0, 3), 1 / 3)
    with pytest.raises(cx.DomainError):
        cx.make_label(1.0, 2, 0)
    with pytest.raises(cx.DomainError):
        cx.make_label(-0.1, 2, 0)
    with pytest.raises(cx.DomainError):
        cx.make_label(0.5, 1, 0)
    with pytest.raises(cx.DomainError):
        cx.make_label(0.5, 3, 3)


def test_correct_context():
    truth = np.random.randint(0, 3, 200)
    labels = cx.make_context_labels(truth, 3, 0.4)
    assert labels.shape == (200, 3)
    assert np.array_equal(np.argmax(labels, axis=1), truth)
    assert np.allclose(cx.negentropy(labels), 0.4)
    with pytest.raises(cx.DomainError):
        cx.make_context_labels([0, 3], 3, 0.4)
    with pytest.raises(ValueError):
        cx.make_context_labels(truth, 3, 0.4, mode='unknown', rng=np.random.default_rng(0))


def test_wrong_context():
    truth = np.random.randint(0, 2, 301)
    for frac in [0.1, 0.5, 0.9]:
        labels = cx.make_context_labels(truth, 2, 0.6, mode='wrong', wrong_frac=frac, rng=np.random.default_rng(5))
        n_wrong = np.sum(np.argmax(labels, axis=1) != truth)
        assert n_wrong == int(np.floor(frac * 301 + 0.5))
    truth = np.random.randint(0, 4, 100)
    labels = cx.make_context_labels(truth, 4, 0.6, mode='wrong', wrong_frac=1.0, rng=np.random.default_rng(5))
    assert np.all(np.argmax(labels, axis=1) != truth)
    with pytest.raises(ValueError):
        cx.make_context_labels(truth, 4, 0.6, mode='wrong', wrong_frac=0.5)
    with pytest.raises(cx.DomainError):
        cx.make_context_labels(truth, 4, 0.6, mode='wrong', wrong_frac=1.5, rng=np.random.default_rng(5))


def test_mixed_context():
    truth = np.random.randint(0, 2, 150)
    labels = cx.make_context_labels(truth, 2, 0.0, mode='mixed', ne_range=(0.1, 0.3), rng=np.random.default_rng(2))
    ne = cx.negentropy(labels)
    assert np.all((ne >= 0.1 - 1e-9) & (ne <= 0.3 + 1e-9))
    assert np.array_equal(np.argmax(labels, axis=1), truth)
    again = cx.make_context_labels(truth, 2, 0.0, mode='mixed', ne_range=(0.1, 0.3), rng=np.random.default_rng(2))
    assert np.array_equal(labels, again)


def test_context_model_labels():
    ctx = cx.ContextModel([0.25, 0.75], cond_z_given_c=[[0.9, 0.1], [0.2, 0.8]], cond_c_given_z=[[0.6, 0.4], [0.1, 0.9]])
    assert ctx.n_contexts == 2
    assert np.allclose(cx.derive_label_ca_latent(ctx), [0.25 * 0.9 + 0.75 * 0.2, 0.25 * 0.1 + 0.75 * 0.8])
    assert np.allclose(cx.derive_label_ca_observed(ctx, 1), [0.2, 0.8])
    raw = cx.derive_label_wca(ctx, 0, normalize=False)
    assert np.allclose(raw, [0.6 / 0.25, 0.1 / 0.25])
    assert np.allclose(cx.derive_label_wca(ctx, 0), raw / raw.sum())


def test_context_model_errors():
    with pytest.raises(ValueError):
        cx.ContextModel([0.5, 0.6])
    with pytest.raises(ValueError):
        cx.ContextModel([0.5, 0.5], cond_z_given_c=[[1.0, 0.0]])
    ctx = cx.ContextModel([0.5, 0.5], cond_z_given_c=[[1.0, 0.0], [0.0, 1.0]])
    with pytest.raises(cx.MissingDistributionError):
        cx.derive_label_wca(ctx, 0)
    with pytest.raises(IndexError):
        cx.derive_label_ca_observed(ctx, 2)
    hidden = cx.ContextModel([0.5, 0.5], cond_z_given_c=[[1.0, 0.0], [0.0, 1.0]], observed=False)
    with pytest.raises(ValueError):
        cx.derive_label_ca_observed(hidden, 0)
    assert np.allclose(cx.derive_label_ca_latent(hidden), [0.5, 0.5])
    no_table = cx.ContextModel([1.0])
    with pytest.raises(cx.MissingDistributionError):
        cx.derive_label_ca_latent(no_table)
    zero = cx.ContextModel([1.0, 0.0], cond_c_given_z=[[1.0, 0.0], [0.5, 0.5]])
    with pytest.raises(cx.ZeroPriorError):
        cx.derive_label_wca(zero, 1)


def test_negentropy_worked_example():
    assert np.isclose(cx.negentropy([0.757, 0.243]), 0.2, atol=1e-3)
    assert np.allclose(cx.make_label(0.2, 2, 0), [0.757, 0.243], atol=1e-3)
    assert np.array_equal(cx.make_label(0.2, 2, 1), cx.make_label(0.2, 2, 1))
