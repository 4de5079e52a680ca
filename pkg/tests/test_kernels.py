"""The compiled and pure-Python kernels must agree bit for bit."""
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from uaroots import _backend, _pykernels as py
from uaroots.centrality import log_table

c = pytest.importorskip("uaroots._ckernels")


def test_backend_is_selected():
    assert _backend.BACKEND in ("cython", "python")


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 2000), st.integers(0, 2 ** 32 - 1))
def test_ua_kernels_agree(n, seed):
    u = np.random.default_rng(seed).random(n - 1)
    pa, pb = py.ua_parents(u), c.ua_parents(u)
    assert np.array_equal(pa, pb)
    assert np.array_equal(py.birth_ranks(pa), c.birth_ranks(pa))
    sa, sb = py.subtree_sizes(pa), c.subtree_sizes(pa)
    assert np.array_equal(sa, sb)
    tab = log_table(n)
    assert np.array_equal(py.log_ratios(pa, sa, tab), c.log_ratios(pa, sa, tab))
    rk = py.birth_ranks(pa)
    for x, y in zip(py.weights_heights(pa, rk), c.weights_heights(pa, rk)):
        assert np.array_equal(x, y)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 8), st.integers(1, 500), st.integers(0, 2 ** 32 - 1))
def test_regular_kernels_agree(d, n, seed):
    u = np.random.default_rng(seed).random(n - 1)
    pa, ra = py.ua_regular_tree(d, u)
    pb, rb = c.ua_regular_tree(d, u)
    assert np.array_equal(pa, pb) and np.array_equal(ra, rb)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(1, 5), min_size=1, max_size=5), st.integers(1, 4),
       st.integers(0, 400), st.integers(0, 50), st.integers(0, 2 ** 32 - 1))
def test_urn_kernels_agree(counts, repl, draws, thin, seed):
    u = np.random.default_rng(seed).random(draws)
    start = np.asarray(counts, dtype=np.int64)
    fa, ta = py.polya_urn(start, repl, u, thin)
    fb, tb = c.polya_urn(start, repl, u, thin)
    assert np.array_equal(fa, fb) and np.array_equal(ta, tb)
    assert fa.sum() == start.sum() + draws * repl
