import math

import numpy as np
import pytest
from scipy import stats

from uaroots.limits import (LimitFlowSample, W_LOW, beta_conditional_tail,
                            enumerate_Ex_random_flow, geometric_branching, geometric_chisquare,
                            inverse_sqrt_moment, path_maxima, phi_limit_bound_batch,
                            q_domination_check, q_flow_value, random_flow_slacks,
                            rearrange_dirichlet, rearrange_dirichlet_batch, rearrange_uniform,
                            rearrange_uniform_batch, sample_dirichlet_sym, sample_phi_limit_bound,
                            stick_break_dirichlet, urn_dirichlet, w_coupling)
from uaroots.stats import ks_two_sample, ks_uniform


def test_dirichlet_sym():
    x = sample_dirichlet_sym(2, 1.0, 0, size=100_000)
    assert np.allclose(x.sum(axis=1), 1)
    assert ks_uniform(x[:, 0]) < 0.01
    x = sample_dirichlet_sym(3, 0.5, 1, size=100_000)
    se = x.std(axis=0) / math.sqrt(len(x))
    assert (np.abs(x.mean(axis=0) - 1 / 3) < 3 * se).all()
    x = sample_dirichlet_sym(4, 1 / 3, 2, size=200_000)
    m2 = (x ** 2).mean(axis=0)
    se = (x ** 2).std(axis=0) / math.sqrt(len(x))
    assert (np.abs(m2 - 1 / 7) < 3 * se).all()
    for k, a in ((1, 1.0), (3, 0.0)):
        with pytest.raises(ValueError):
            sample_dirichlet_sym(k, a, 0)


def test_stick_breaking():
    for d in (2, 3, 7):
        y = stick_break_dirichlet(d, d, size=1000)
        assert (y >= 0).all()  # tiny parameters can underflow to 0
        assert np.abs(y.sum(axis=1) - 1).max() < 1e-12
    assert ks_uniform(stick_break_dirichlet(2, 4, size=100_000)[:, 0]) < 0.01
    a = stick_break_dirichlet(5, 5, size=100_000)
    b = sample_dirichlet_sym(5, 0.25, 6, size=100_000)
    for i in range(5):
        assert ks_two_sample(a[:, i], b[:, i]) < 0.01
    with pytest.raises(ValueError):
        stick_break_dirichlet(1, 0)


def test_urn_matches_stick_breaking():
    u = urn_dirichlet(3, 2000, 7, size=4000)
    assert np.allclose(u.sum(axis=1), 1)
    s = stick_break_dirichlet(3, 8, size=4000)
    assert ks_two_sample(u[:, 0], s[:, 0]) < 0.04


def test_rearrange_uniform_hand_trace():
    r = rearrange_uniform([0.3, 0.8, 0.4], 3)
    assert r.K == 2
    assert r.sigma.tolist() == [2, 1, 3]
    assert r.companions[0] == pytest.approx(0.7)
    assert r.values[0] == pytest.approx(0.3)
    assert r.values[2] == pytest.approx(0.4 * 0.7 * 0.2)
    assert r.bounds().tolist() == pytest.approx([0.5, 0.35])
    assert r.check()
    r = rearrange_uniform([0.6, 0.2, 0.9, 0.1, 0.3], 5)
    assert r.K == 1 and r.sigma.tolist() == [1, 2, 3, 4, 5]
    assert r.companions.tolist() == pytest.approx([0.9, 0.55, 0.95])


def test_rearrange_uniform_errors():
    with pytest.raises(ValueError):
        rearrange_uniform([0.1, 0.2, 0.3], 3)
    with pytest.raises(ValueError):
        rearrange_uniform([0.9], 1)
    with pytest.raises(ValueError):
        rearrange_uniform([0.9, 0.1], 3)


def test_rearrange_uniform_statistics():
    u = np.random.default_rng(3).random((100_000, 40))
    sigma, v, K, p, bad = rearrange_uniform_batch(u)
    assert bad == 0
    assert (v >= 0.5).all() and (v <= 1).all()
    assert ks_uniform(v[:, 0], 0.5, 1.0) < 0.01
    assert ks_uniform(v[:, 5], 0.5, 1.0) < 0.01
    assert abs(np.corrcoef(v[:, 0], v[:, 1])[0, 1]) < 0.01


def test_rearrange_dirichlet():
    y, r = rearrange_dirichlet(2, 0)
    assert y[r.sigma[1] - 1] <= 0.5
    for d in (3, 6, 10):
        y, r = rearrange_dirichlet(d, d)
        assert r.check()
        assert set(r.companions.tolist()) <= {W_LOW, 1.0}
        assert sorted(r.sigma.tolist()) == list(range(1, d + 1))
    rng = np.random.default_rng(5)
    y, sigma, w, K, bad = rearrange_dirichlet_batch(6, 100_000, rng)
    assert bad == 0
    frac = (w == W_LOW).mean(axis=0)
    se = math.sqrt(0.25 / len(w))
    assert (np.abs(frac - 0.5) < 3 * se).all()
    with pytest.raises(ValueError):
        rearrange_dirichlet(1, 0)


def test_w_coupling_probabilities():
    for d in (2, 3, 6, 10):
        c = w_coupling(d)
        assert ((c.before >= 0.5) & (c.before <= 1)).all()
        assert ((c.after >= 0.5) & (c.after <= 1)).all()


def test_beta_conditional_tail():
    assert beta_conditional_tail(1, 1) == pytest.approx(2 / 17, rel=1e-8)
    assert beta_conditional_tail(2, 1) == pytest.approx(4 / 289, rel=1e-8)
    grid = [beta_conditional_tail(a, b) for a in np.linspace(1, 2, 11)
            for b in np.linspace(0.05, 1, 20)]
    assert max(grid) <= 0.5
    for a, b in ((0.5, 0.5), (1.5, 0), (1.5, 1.5)):
        with pytest.raises(ValueError):
            beta_conditional_tail(a, b)


def test_q_flow_value():
    assert q_flow_value({}, (1, 1, 1, 1)) == 1
    assert q_flow_value({}, (2,)) == 0.5
    assert q_flow_value({(1,): 0.9}, (3,)) == pytest.approx(0.45)
    with pytest.raises(KeyError):
        q_flow_value({}, (3,))


def test_q_domination():
    bad, checked = q_domination_check(2000, 3, 4, seed=1)
    assert bad == 0 and checked == 2000 * (4 + 16 + 64)


def test_random_flow_basics():
    assert enumerate_Ex_random_flow("UA", 1, 0)[0] == 1
    for seed in range(20):
        assert enumerate_Ex_random_flow("UA", 1.9, seed)[0] == 1
        assert enumerate_Ex_random_flow("UA_regular", 1.9, seed, d=3)[0] == 1
    with pytest.raises(ValueError):
        LimitFlowSample("UA_regular", 0)
    with pytest.raises(ValueError):
        LimitFlowSample("PA", 0)


def test_random_flow_consistency():
    f = LimitFlowSample("UA", 4)
    for u in [(), (1,), (2, 1)]:
        pu = f.value(u)
        total = sum(f.value(u + (i,)) for i in range(1, 201))
        assert total <= pu * (1 + 1e-12)
        assert total == pytest.approx(pu, abs=1e-6)
    g = LimitFlowSample("UA_regular", 5, d=3)
    for u in [(), (2,), (3, 1)]:
        assert sum(g.value(u + (i,)) for i in (1, 2, 3)) == pytest.approx(g.value(u))
        assert g.value(u + (4,)) == 0


def test_random_flow_set_is_exact():
    # brute force membership, level by level, on the same lazily drawn sample
    from uaroots.flows import enumerate_small_ratio_set

    for model, d in (("UA", None), ("UA_regular", 2)):
        f = LimitFlowSample(model, 9, d)
        x = 40.0
        got = enumerate_small_ratio_set(f, x)
        want = {()}
        frontier = [()]
        while frontier:
            nxt = []
            for u in frontier:
                for j in range(1, 60 if d is None else d + 1):
                    w = u + (j,)
                    prod = x
                    for i in range(1, len(w) + 1):
                        prod *= f.value(w[:i]) / 2
                    if prod >= 1:
                        want.add(w)
                        nxt.append(w)
            frontier = nxt
        assert got == want


def test_slacks_reproduce_counts():
    for model, d in (("UA", None), ("UA_regular", 3)):
        s = random_flow_slacks(model, 100, np.random.default_rng(2), d)
        n10 = enumerate_Ex_random_flow(model, 10, np.random.default_rng(2), d=d)[0]
        assert int(np.count_nonzero(s <= math.log(10) + 1e-12)) == n10
        assert int(np.count_nonzero(s <= math.log(100) + 1e-12)) == len(s)


def test_phi_limit_bound():
    log_x, G = phi_limit_bound_batch("UA", 10_000, 0)
    assert (log_x >= 0).all() and (G >= 1).all()
    assert sample_phi_limit_bound("UA_regular", 1, d=4) >= 0
    v = path_maxima("UA", np.random.default_rng(0), 1_000_000, 1)[:, 0]
    m, se = inverse_sqrt_moment(v)
    assert abs(m / (2 * math.sqrt(2)) - 1) < 0.01
    for d in (2, 5, 10):
        v = path_maxima("UA_regular", np.random.default_rng(d), 50_000, 2, d)
        assert (v >= 1 / (d + 1)).all()
        for col in range(2):
            assert inverse_sqrt_moment(v[:, col])[0] <= 7 * math.sqrt(2)
    with pytest.raises(ValueError):
        path_maxima("UA_regular", np.random.default_rng(0), 1, 1)


def test_geometric_branching():
    assert (geometric_branching(0, 10, 0) == 1).all()
    for r in (1, 2, 3):
        z = geometric_branching(r, 100_000, r)
        _, p = geometric_chisquare(z, 2.0 ** -r)
        assert p > 0.001
    z = stats.geom.rvs(0.25, size=50_000, random_state=3)
    assert geometric_chisquare(z, 0.5)[1] < 1e-6
