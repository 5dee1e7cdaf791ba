import numpy as np
import camix as cx
import pytest

np.random.seed(0)


def test_root_linear():
    value = np.random.normal(0, 100)
    root = cx.roots.find_bracketed_root(lambda x: x - value, value - 50.0)
    assert np.isclose(root, value)
    root = cx.roots.find_bracketed_root(lambda x: x - value, value + 50.0, direction=-1)
    assert np.isclose(root, value)
    assert cx.roots.find_bracketed_root(lambda x: x - 2.0, 2.0) == 2.0


def test_no_root():
    with pytest.raises(cx.NoRootError):
        cx.roots.find_bracketed_root(lambda x: x ** 2 + 1, 0.0, max_expand=10)
    with pytest.raises(ValueError):
        cx.roots.find_bracketed_root(lambda x: x, 1.0, direction=0)


def test_bisect_root():
    assert np.isclose(cx.roots.bisect_root(lambda x: x ** 2 - 2, 0.0, 2.0), np.sqrt(2))
    assert cx.roots.bisect_root(lambda x: x, 0.0, 1.0) == 0.0
    with pytest.raises(cx.NoRootError):
        cx.roots.bisect_root(lambda x: x ** 2 + 1, -1.0, 1.0)
