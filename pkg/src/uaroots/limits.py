"""Limit objects of the growth models.

Subtree proportions converge almost surely. In uniform attachment the
limits factor through independent uniforms,

    P[u*i] = P[u] * U[u*i] * prod_{j<i} (1 - U[u*j]),

and in the regular model through independent symmetric Dirichlet vectors,
P[u*i] = P[u] * D[u*i]. This module samples those objects, builds the
sibling rearrangements that dominate them by geometric sequences, and
samples the almost-sure bound on the limiting competitive ratio.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate, special, stats

from ._backend import kernels
from .flows import DEFAULT_BUDGET, PreflowGenerator, enumerate_small_ratio_set
from .growth import SeedLike, as_generator
from .words import Word

W_LOW = 16.0 / 17.0
REL_TOL = 1e-12


# Dirichlet samplers ---------------------------------------------------------


def sample_dirichlet_sym(k: int, alpha: float, seed: SeedLike = None, size=None) -> np.ndarray:
    """Symmetric Dirichlet(alpha) vectors of length k (numpy's gamma-ratio sampler)."""
    if k < 2:
        raise ValueError("k must be >= 2")
    if not alpha > 0:
        raise ValueError("alpha must be > 0")
    return as_generator(seed).dirichlet(np.full(k, float(alpha)), size=size)


def stick_breaking_factors(d: int, rng: np.random.Generator, size: int) -> np.ndarray:
    """X[:, i-1] ~ Beta(d/(d-1), 1 - (i-1)/(d-1)) for i = 1..d-1, independent."""
    i = np.arange(1, d)
    a = d / (d - 1)
    b = 1.0 - (i - 1) / (d - 1)
    return rng.beta(a, b, size=(size, d - 1))


def stick_pieces(x: np.ndarray) -> np.ndarray:
    """Y_i = X_i prod_{j<i}(1 - X_j) for i < d and Y_d = prod_j (1 - X_j)."""
    n, m = x.shape
    left = np.ones((n, m + 1))
    np.cumprod(1.0 - x, axis=1, out=left[:, 1:])
    y = np.empty((n, m + 1))
    y[:, :m] = x * left[:, :m]
    y[:, m] = left[:, m]
    return y


def stick_break_dirichlet(d: int, seed: SeedLike = None, size=None) -> np.ndarray:
    """Dirichlet_d(1/(d-1)) via size-biased stick-breaking and a uniform shuffle."""
    if d < 2:
        raise ValueError("d must be >= 2")
    rng = as_generator(seed)
    m = 1 if size is None else int(size)
    y = rng.permuted(stick_pieces(stick_breaking_factors(d, rng, m)), axis=1)
    return y[0] if size is None else y


def urn_dirichlet(d: int, draws: int, seed: SeedLike = None, size: int = 1) -> np.ndarray:
    """Proportions of a d-colour urn (one ball each, d-1 added per draw) after
    ``draws`` draws; converges to Dirichlet_d(1/(d-1))."""
    rng = as_generator(seed)
    start = np.ones(d, dtype=np.int64)
    out = np.empty((size, d))
    for r in range(size):
        out[r] = kernels.polya_urn(start, d - 1, rng.random(draws), 0)[0]
    return out / (d + draws * (d - 1))


# rearrangements -------------------------------------------------------------


@dataclass(frozen=True)
class RearrangementResult:
    """Reordering of a sibling sequence with geometric companions.

    ``sigma`` is 1-based: ``sigma[i-1]`` is the original index placed at
    position i. ``values`` are the sibling masses in original order and
    ``companions`` the V (or W) sequence. ``check`` verifies
    values[sigma(i)] <= 1/2 * prod_{j <= i-2} companions[j] for 2 <= i <= horizon.
    """

    sigma: np.ndarray
    companions: np.ndarray
    K: int
    values: np.ndarray

    def bounds(self) -> np.ndarray:
        h = len(self.sigma)
        c = np.r_[1.0, np.cumprod(self.companions[: max(h - 2, 0)])]
        return 0.5 * c[: h - 1]

    def violations(self) -> int:
        placed = self.values[self.sigma[1:] - 1]
        return int(np.count_nonzero(placed > self.bounds() * (1 + REL_TOL)))

    def check(self) -> bool:
        return self.violations() == 0


def _sigma(K: np.ndarray, h: int) -> np.ndarray:
    i = np.arange(1, h + 1)[None, :]
    K = K[:, None]
    return np.where(i == 1, K, np.where(i <= K, i - 1, i))


def uniform_pieces(u: np.ndarray) -> np.ndarray:
    """P_i = U_i prod_{j<i}(1 - U_j), row-wise."""
    left = np.ones_like(u)
    np.cumprod(1.0 - u[:, :-1], axis=1, out=left[:, 1:])
    return u * left


def rearrange_uniform_batch(u: np.ndarray):
    """Row-wise rearrangement of uniform sequences of length ``horizon``.

    Returns (sigma, V, K, P, violations). Rows without an entry above 1/2
    raise, since K is then beyond the horizon.
    """
    u = np.atleast_2d(np.asarray(u, dtype=np.float64))
    n, h = u.shape
    if h < 2:
        raise ValueError("horizon must be >= 2")
    big = u > 0.5
    if not big.any(axis=1).all():
        raise ValueError("no entry above 1/2 within the horizon; enlarge it")
    K = big.argmax(axis=1) + 1
    j = np.arange(1, h - 1)[None, :]
    # V_j = 1 - U_j before the pivot, 1 - U_{j+1}/2 from it on
    v = np.where(j <= K[:, None] - 1, 1.0 - u[:, : h - 2], 1.0 - u[:, 1 : h - 1] / 2)
    sigma = _sigma(K, h)
    p = uniform_pieces(u)
    placed = np.take_along_axis(p, sigma[:, 1:] - 1, axis=1)
    bound = 0.5 * np.concatenate([np.ones((n, 1)), np.cumprod(v, axis=1)], axis=1)
    bad = int(np.count_nonzero(placed > bound * (1 + REL_TOL)))
    return sigma, v, K, p, bad


def rearrange_uniform(us, horizon: int) -> RearrangementResult:
    us = np.asarray(us, dtype=np.float64)
    if horizon < 2:
        raise ValueError("horizon must be >= 2")
    if us.size < horizon:
        raise ValueError(f"need at least {horizon} uniforms, got {us.size}")
    sigma, v, K, p, bad = rearrange_uniform_batch(us[None, :horizon])
    res = RearrangementResult(sigma[0], v[0], int(K[0]), p[0])
    assert bad == 0, "rearrangement inequality failed"
    return res


@dataclass(frozen=True)
class WCoupling:
    """Probabilities of choosing the small companion when both values fit.

    ``before[i-1]`` applies to X_i conditioned on X_i <= 1/2 (positions
    before the pivot), ``after[i-1]`` to X_i unconditioned.
    """

    d: int
    before: np.ndarray
    after: np.ndarray


def w_coupling(d: int) -> WCoupling:
    """Pick W = 16/17 with the probability that makes P(W = 16/17) = 1/2 exactly.

    Given the admissible event X >= 1/17 (both values dominate 1 - X), choose
    16/17 with probability 1/(2(1 - t)) where t is the chance of X < 1/17
    under the relevant law; t <= 1/2 keeps that a probability.
    """
    i = np.arange(1, d)
    a = d / (d - 1)
    b = 1.0 - (i - 1) / (d - 1)
    below = special.betainc(a, b, 1.0 / 17.0)
    half = special.betainc(a, b, 0.5)
    t_cond = below / half
    if (t_cond > 0.5).any():
        raise ArithmeticError("conditional tail above 1/2; coupling impossible")
    return WCoupling(d, 0.5 / (1.0 - t_cond), 0.5 / (1.0 - below))


def rearrange_dirichlet_batch(d: int, size: int, rng: np.random.Generator):
    """Returns (dirichlet rows in stick order, sigma, W, K, violations)."""
    x = stick_breaking_factors(d, rng, size)
    y = stick_pieces(x)
    big = x > 0.5
    K = np.where(big.any(axis=1), big.argmax(axis=1) + 1, d)
    coup = w_coupling(d)
    m = d - 2
    if m > 0:
        i = np.arange(1, m + 1)[None, :]
        before = i <= K[:, None] - 1
        # the X that W_i must dominate: X_i before the pivot, X_{i+1} after
        xr = np.where(before, x[:, :m], x[:, 1 : m + 1])
        forced = xr < 1.0 / 17.0
        q = np.where(before, coup.before[:m][None, :], coup.after[1 : m + 1][None, :])
        coin = rng.random((size, m)) < q
        w = np.where(forced, 1.0, np.where(coin, W_LOW, 1.0))
        if (w < 1.0 - xr).any():
            raise AssertionError("companion below 1 - X")
    else:
        w = np.ones((size, 0))
    sigma = _sigma(K, d)
    placed = np.take_along_axis(y, sigma[:, 1:] - 1, axis=1)
    bound = 0.5 * np.concatenate([np.ones((size, 1)), np.cumprod(w, axis=1)], axis=1)
    bad = int(np.count_nonzero(placed > bound * (1 + REL_TOL)))
    return y, sigma, w, K, bad


def rearrange_dirichlet(d: int, seed: SeedLike = None) -> tuple[np.ndarray, RearrangementResult]:
    """One Dirichlet_d(1/(d-1)) vector with its rearrangement.

    The returned vector is in stick-breaking order; the rearrangement
    inequality is asserted for the sample.
    """
    if d < 2:
        raise ValueError("d must be >= 2")
    y, sigma, w, K, bad = rearrange_dirichlet_batch(d, 1, as_generator(seed))
    assert bad == 0, "rearrangement inequality failed"
    return y[0], RearrangementResult(sigma[0], w[0], int(K[0]), y[0])


# random flows ---------------------------------------------------------------


class LimitFlowSample(PreflowGenerator):
    """One sample of the limiting subtree-proportion flow, drawn lazily.

    UA: each node owns an infinite uniform sequence, materialized in blocks.
    UA_regular(d): the flow below the root's first child rescaled to 1, so
    every node has d children with Dirichlet_d(1/(d-1)) proportions.
    """

    BLOCK = 16

    def __init__(self, model: str, seed: SeedLike = None, d: Optional[int] = None):
        self.rng = as_generator(seed)
        self.model = model
        if model == "UA":
            self.kind = "random_UA"
            self.max_children = None
        elif model == "UA_regular":
            if d is None or d < 2:
                raise ValueError("UA_regular needs d >= 2")
            self.kind = f"random_UA_regular({d})"
            self.max_children = d
        else:
            raise ValueError(f"unknown model {model!r}")
        self.d = d
        self._u: dict[Word, np.ndarray] = {}
        # log of each node's child masses relative to the node, and of the
        # mass left for children j, j+1, ... (UA only)
        self._log_piece: dict[Word, np.ndarray] = {}
        self._log_left: dict[Word, np.ndarray] = {}

    def factors(self, u: Word, count: int) -> np.ndarray:
        """The first ``count`` sibling factors below u (uniforms, or the Dirichlet vector)."""
        u = tuple(u)
        if self.model == "UA_regular":
            if u not in self._u:
                self._u[u] = stick_break_dirichlet(self.d, self.rng)
            return self._u[u][:count]
        have = self._u.get(u)
        if have is None or have.size < count:
            extra = max(self.BLOCK, count - (0 if have is None else have.size))
            new = self.rng.random(extra)
            have = new if have is None else np.r_[have, new]
            self._u[u] = have
            left = np.r_[0.0, np.cumsum(np.log1p(-have))]
            self._log_left[u] = left
            self._log_piece[u] = np.log(have) + left[:-1]
        return have[:count]

    def _log_child_rel(self, u: Word, j: int) -> float:
        if self.model == "UA_regular":
            if j > self.d:
                return -math.inf
            return math.log(self.factors(u, self.d)[j - 1])
        if u not in self._log_piece or self._log_piece[u].size < j:
            self.factors(u, j)
        return float(self._log_piece[u][j - 1])

    def log_child(self, u: Word, log_fu: float, j: int) -> float:
        return log_fu + self._log_child_rel(u, j)

    def log_remaining(self, u: Word, log_fu: float, j: int) -> float:
        """log of the mass available to children j, j+1, ... of u."""
        if self.model == "UA_regular":
            return None
        if u not in self._log_left or self._log_left[u].size < j:
            self.factors(u, j)
        return log_fu + float(self._log_left[u][j - 1])

    def value(self, w: Word) -> float:
        w = tuple(w)
        lv = 0.0
        for i in range(len(w)):
            lv += self._log_child_rel(w[:i], w[i])
        return math.exp(lv)


def enumerate_Ex_random_flow(model: str, x: float, seed: SeedLike = None,
                             budget: int = DEFAULT_BUDGET, d: Optional[int] = None):
    """(N_x, E_x) for one sample of the limit flow of ``model``."""
    flow = LimitFlowSample(model, seed, d)
    words = enumerate_small_ratio_set(flow, x, budget)
    return len(words), words


def random_flow_slacks(model: str, x_max: float, rng: np.random.Generator,
                       d: Optional[int] = None, budget: int = DEFAULT_BUDGET) -> np.ndarray:
    """For each word of E_{x_max} on one flow sample, the amount
    -sum log(P_v/2) along its path. N_x on the same sample is the number of
    entries <= log x, for any x <= x_max."""
    flow = LimitFlowSample(model, rng, d)
    words = enumerate_small_ratio_set(flow, x_max, budget)
    out = np.empty(len(words))
    for k, w in enumerate(words):
        s = 0.0
        for i in range(len(w)):
            s += math.log(2.0) - flow._log_child_rel(w[:i], w[i])
        out[k] = s
    return out


# competitive-ratio limit bound ----------------------------------------------


def _max_dirichlet(k: int, d: int, rng, size) -> np.ndarray:
    return rng.dirichlet(np.full(k, 1.0 / (d - 1)), size=size).max(axis=1)


def path_maxima(model: str, rng: np.random.Generator, size: int, steps: int,
                d: Optional[int] = None) -> np.ndarray:
    """i.i.d.-along-path maximal proportions, shape (size, steps)."""
    if model == "UA":
        return rng.uniform(0.5, 1.0, size=(size, steps))
    if model == "UA_regular":
        if d is None or d < 2:
            raise ValueError("UA_regular needs d >= 2")
        v = np.empty((size, steps))
        v[:, 0] = _max_dirichlet(d + 1, d, rng, size)
        for i in range(1, steps):
            v[:, i] = _max_dirichlet(d, d, rng, size)
        return v
    raise ValueError(f"unknown model {model!r}")


def phi_limit_bound_batch(model: str, size: int, seed: SeedLike = None,
                          d: Optional[int] = None, steps: int = 64):
    """Vectorized samples of (log X, G).

    With V_1, V_2, ... the path maxima and G the first i with
    V_1...V_i <= 1/2, X = prod_{i<G} 1/(1 - V_1...V_i).
    """
    rng = as_generator(seed)
    v = path_maxima(model, rng, size, steps, d)
    prod = np.cumprod(v, axis=1)
    done = prod <= 0.5
    if not done.any(axis=1).all():
        raise ValueError("path did not drop below 1/2 within the step budget")
    G = done.argmax(axis=1) + 1
    mask = np.arange(1, steps + 1)[None, :] < G[:, None]
    log_x = -np.where(mask, np.log1p(-np.minimum(prod, 1 - 1e-16)), 0.0).sum(axis=1)
    return log_x, G


def sample_phi_limit_bound(model: str, seed: SeedLike = None, d: Optional[int] = None) -> float:
    log_x, _ = phi_limit_bound_batch(model, 1, seed, d)
    return float(log_x[0])


def inverse_sqrt_moment(v: np.ndarray) -> tuple[float, float]:
    """Sample mean and standard error of (1 - V)^(-1/2)."""
    z = (1.0 - v) ** -0.5
    return float(z.mean()), float(z.std(ddof=1) / math.sqrt(z.size))


# beta tail ------------------------------------------------------------------


def beta_conditional_tail(a: float, b: float) -> float:
    """P(X < 1/17 | X <= 1/2) for X ~ Beta(a, b), by adaptive quadrature."""
    if not 1.0 <= a <= 2.0:
        raise ValueError("a must lie in [1, 2]")
    if not 0.0 < b <= 1.0:
        raise ValueError("b must lie in (0, 1]")

    def dens(t):
        return t ** (a - 1) * (1 - t) ** (b - 1)

    num, _ = integrate.quad(dens, 0.0, 1.0 / 17.0, epsabs=0, epsrel=1e-12, limit=200)
    rest, _ = integrate.quad(dens, 1.0 / 17.0, 0.5, epsabs=0, epsrel=1e-12, limit=200)
    return num / (num + rest)


# Q flow ---------------------------------------------------------------------


def q_flow_value(v_table, w: Word) -> float:
    """Q(root) = 1, Q(u*1) = Q(u), Q(u*i) = Q(u)/2 * prod_{j<=i-2} V(u*j)."""
    w = tuple(w)
    q = 1.0
    for h in range(len(w)):
        u, i = w[:h], w[h]
        if i >= 2:
            q *= 0.5
            for j in range(1, i - 1):
                key = u + (j,)
                if key not in v_table:
                    raise KeyError(f"missing V value for {key}")
                q *= v_table[key]
    return q


def q_domination_check(samples: int, depth: int, width: int, seed: SeedLike = None,
                       horizon: int = 64) -> tuple[int, int]:
    """Rearrange the children of every node with its own uniform sequence and
    check P(sigma(u)) <= Q(u) on the sorted tree to ``depth`` levels of
    ``width`` children. Returns (violations, comparisons)."""
    rng = as_generator(seed)
    frontier = [(np.ones(samples), np.ones(samples))]  # (P at original node, Q)
    bad = checked = 0
    for _ in range(depth):
        nxt = []
        for p, q in frontier:
            u = rng.random((samples, horizon))
            sigma, v, K, pieces, _ = rearrange_uniform_batch(u)
            qbound = 0.5 * np.concatenate([np.ones((samples, 1)), np.cumprod(v, axis=1)], axis=1)
            for k in range(1, width + 1):
                pc = p * pieces[np.arange(samples), sigma[:, k - 1] - 1]
                qc = q if k == 1 else q * qbound[:, k - 2]
                bad += int(np.count_nonzero(pc > qc * (1 + REL_TOL)))
                checked += samples
                nxt.append((pc, qc))
        frontier = nxt
    return bad, checked


# geometric branching ---------------------------------------------------------


def geometric_branching(r: int, size: int, seed: SeedLike = None) -> np.ndarray:
    """Generation-r size of a branching process with Geometric(1/2) offspring
    on {1, 2, ...}, started from one individual."""
    rng = as_generator(seed)
    z = np.ones(size, dtype=np.int64)
    for _ in range(r):
        # sum of z geometric(1/2) variables = z + NegBin(z, 1/2) failures
        z = z + rng.negative_binomial(z, 0.5)
    return z


def geometric_chisquare(z: np.ndarray, p: float, bins: int = 30):
    """Chi-square goodness of fit of positive integer samples to Geometric(p),
    pooling the tail so every expected count is at least 5."""
    n = z.size
    k = np.arange(1, bins + 1)
    probs = p * (1 - p) ** (k - 1)
    expected = n * probs
    keep = int(np.searchsorted(-expected, -5.0))  # expected is decreasing
    keep = max(keep, 1)
    obs = np.bincount(np.minimum(z, keep + 1), minlength=keep + 2)[1:]
    exp = np.r_[expected[:keep], n - expected[:keep].sum()]
    return stats.chisquare(obs, exp)
