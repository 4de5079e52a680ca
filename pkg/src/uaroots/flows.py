"""Preflows on the Ulam-Harris tree and exact counting of their small-ratio sets.

A preflow f maps words to [0, 1] with f(root) = 1 and children summing to
at most their parent. For x >= 1 the set

    E_x(f) = {u : x * prod over non-root prefixes v of u of f(v)/2 >= 1}

is finite and closed under taking parents (every factor is at most 1/2),
so it can be enumerated exactly by a pruned depth-first search.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .tree import PlaneTree
from .words import ROOT, Word

DEFAULT_BUDGET = 10_000_000
LOG2 = math.log(2.0)
# log-space slack before falling back to exact arithmetic on the boundary
BOUNDARY_TOL = 1e-12


class BudgetExceeded(RuntimeError):
    """Enumeration visited more words than allowed."""

    def __init__(self, message, partial_count):
        super().__init__(message)
        self.partial_count = partial_count


class PreflowGenerator:
    """Lazily evaluated preflow.

    Subclasses implement ``value`` (and may override ``log_child`` for speed).
    ``max_children`` bounds the support of every node's children (None means
    unbounded); ``monotone_siblings`` promises f(u*1) >= f(u*2) >= ...
    """

    kind = "custom"
    max_children: Optional[int] = None
    monotone_siblings = False

    def value(self, w: Word) -> float:
        raise NotImplementedError

    def log_child(self, u: Word, log_fu: float, j: int) -> float:
        v = self.value(u + (j,))
        return math.log(v) if v > 0 else -math.inf

    def log_remaining(self, u: Word, log_fu: float, j: int) -> Optional[float]:
        """log of an upper bound on f(u*k) for every k >= j, or None to let
        the search track f(u) minus the mass already seen."""
        return None

    def exact_value(self, w: Word) -> Optional[Fraction]:
        """Exact rational value when available, used to settle boundary cases."""
        return None

    def __call__(self, w) -> float:
        return self.value(tuple(w))


class FunctionPreflow(PreflowGenerator):
    def __init__(self, fn: Callable[[Word], float], kind: str = "custom",
                 max_children: Optional[int] = None, monotone_siblings: bool = False):
        self._fn = fn
        self.kind = kind
        self.max_children = max_children
        self.monotone_siblings = monotone_siblings

    def value(self, w: Word) -> float:
        return 1.0 if not w else float(self._fn(tuple(w)))


class GammaFlow(PreflowGenerator):
    """Geometric preflow: gamma(root) = 1, gamma(u*j) = alpha**(1-j) * gamma(u)."""

    monotone_siblings = True

    def __init__(self, alpha):
        self.alpha_exact = Fraction(alpha)
        self.alpha = float(alpha)
        if not 1.0 < self.alpha <= 2.0:
            raise ValueError(f"alpha must lie in (1, 2], got {alpha}")
        self.log_alpha = math.log(self.alpha)
        self.kind = f"gamma({self.alpha:g})"

    def log_value(self, w: Word) -> float:
        return -self.log_alpha * (sum(w) - len(w))

    def value(self, w: Word) -> float:
        return math.exp(self.log_value(tuple(w)))

    def log_child(self, u, log_fu, j):
        return log_fu - (j - 1) * self.log_alpha

    def exact_value(self, w: Word) -> Fraction:
        return self.alpha_exact ** -(sum(w) - len(w))


def gamma_value(alpha, w: Word) -> float:
    """alpha ** -(sum of (letter - 1)), computed in log space."""
    return GammaFlow(alpha).value(tuple(w))


class DaryExplicit(PreflowGenerator):
    """Preflow given by a function that returns the d child values of a word."""

    def __init__(self, d: int, child_fn: Callable[[Word], "np.ndarray | list"]):
        if d < 2:
            raise ValueError("d must be >= 2")
        self.d = d
        self.max_children = d
        self.kind = "dary_explicit"
        self._child_fn = child_fn
        self._cache: dict[Word, list] = {}

    def _children(self, u: Word) -> list:
        vals = self._cache.get(u)
        if vals is None:
            vals = [float(v) for v in self._child_fn(u)]
            if len(vals) > self.d:
                raise ValueError(f"node {u} has {len(vals)} children, more than d={self.d}")
            vals += [0.0] * (self.d - len(vals))
            self._cache[u] = vals
        return vals

    def value(self, w: Word) -> float:
        w = tuple(w)
        if not w:
            return 1.0
        if w[-1] > self.d:
            return 0.0
        return self._children(w[:-1])[w[-1] - 1]


def uniform_split_flow(d: int) -> DaryExplicit:
    """Every node passes 1/d of its value to each of its d children."""
    return DaryExplicit(d, lambda u, d=d: [d ** -(len(u) + 1)] * d)


class TreePreflow(PreflowGenerator):
    """Subtree proportions below a base node: f(w) = |subtree(base*w)| / |subtree(base)|."""

    kind = "tree"

    def __init__(self, t: PlaneTree, base: int = 0):
        self.t = t
        self.base = int(base)
        self.base_word = t.word(self.base)
        self.total = int(t.sizes[self.base])
        inside = np.zeros(len(t), dtype=bool)
        inside[self.base] = True
        parent = t.parent
        for i in range(self.base + 1, len(t)):
            inside[i] = inside[parent[i]]
        self.max_children = int(t.child_counts()[inside].max())

    def value(self, w: Word) -> float:
        w = tuple(w)
        full = self.base_word + w
        if full not in self.t:
            return 0.0
        return float(self.t.sizes[self.t.node(full)]) / self.total

    def exact_value(self, w: Word) -> Fraction:
        full = self.base_word + tuple(w)
        if full not in self.t:
            return Fraction(0)
        return Fraction(int(self.t.sizes[self.t.node(full)]), self.total)


def tree_preflow(t: PlaneTree, base: int = 0) -> TreePreflow:
    return TreePreflow(t, base)


def _exact_member(f: PreflowGenerator, x, u: Word) -> Optional[bool]:
    prod = Fraction(x)
    for i in range(1, len(u) + 1):
        v = f.exact_value(u[:i])
        if v is None:
            return None
        prod *= v / 2
    return prod >= 1


def enumerate_small_ratio_set(
    f: PreflowGenerator,
    x: float,
    node_budget: int = DEFAULT_BUDGET,
) -> set[Word]:
    """E_x(f) by depth-first search.

    A word outside the set has no descendants in it. The scan over the
    children of u stops once the remaining sibling mass (f(u) minus what the
    earlier children used) is too small for any later child to qualify, or
    at the first failing child when siblings are non-increasing.
    """
    if x < 1:
        raise ValueError("x must be >= 1")
    log_x = math.log(x)
    tol = BOUNDARY_TOL * max(1.0, log_x)
    out: set[Word] = {ROOT}
    visited = 1
    # (word, log f(word), slack = log x + sum of log(f/2) along the path)
    stack = [(ROOT, 0.0, log_x)]
    while stack:
        u, log_fu, slack_u = stack.pop()
        if slack_u - LOG2 < -tol:
            continue  # even a child with f = f(u) <= 1 fails
        used = 0.0
        fu = math.exp(log_fu)
        j = 0
        while True:
            j += 1
            if f.max_children is not None and j > f.max_children:
                break
            if not f.monotone_siblings:
                log_rem = f.log_remaining(u, log_fu, j)
                if log_rem is None:
                    remaining = fu - used
                    log_rem = math.log(remaining) if remaining > 0 else -math.inf
                if slack_u + log_rem - LOG2 < -tol:
                    break
            visited += 1
            if visited > node_budget:
                raise BudgetExceeded(
                    f"visited more than {node_budget} words with {len(out)} members found",
                    len(out),
                )
            log_fc = f.log_child(u, log_fu, j)
            w = u + (j,)
            slack = slack_u + log_fc - LOG2
            if slack >= tol:
                member = True
            elif slack < -tol:
                member = False
            else:
                exact = _exact_member(f, x, w)
                member = True if exact is None else exact
            if member:
                out.add(w)
                stack.append((w, log_fc, slack))
            elif f.monotone_siblings:
                break
            if not f.monotone_siblings:
                used += math.exp(log_fc)
    return out


def small_ratio_count(f: PreflowGenerator, x: float, node_budget: int = DEFAULT_BUDGET) -> int:
    return len(enumerate_small_ratio_set(f, x, node_budget))


@lru_cache(maxsize=None)
def _partition_table(s: int) -> tuple:
    p = [1] + [0] * s
    for part in range(1, s + 1):
        for total in range(part, s + 1):
            p[total] += p[total - part]
    return tuple(p)


def partition_count(s: int) -> int:
    """Number of integer partitions of s."""
    if s < 0:
        raise ValueError("s must be >= 0")
    return _partition_table(s)[s]


def erdos_bound(s: float) -> float:
    return math.exp(math.pi * math.sqrt(2.0 * s / 3.0))


def erdos_certificate(s: int) -> tuple[int, float, bool]:
    """(p(s), exp(pi*sqrt(2s/3)), p(s) <= bound)."""
    if s < 1:
        raise ValueError("s must be >= 1")
    p = partition_count(s)
    bound = erdos_bound(s)
    return p, bound, p <= bound


def floor_log(alpha, x) -> int:
    """Largest n with alpha**n <= x, settled exactly in rationals."""
    a, xx = Fraction(alpha), Fraction(x)
    n = max(0, int(math.floor(math.log(float(x)) / math.log(float(alpha)))))
    while a ** n > xx:
        n -= 1
    while a ** (n + 1) <= xx:
        n += 1
    return n


@dataclass(frozen=True)
class CountCertificate:
    x: float
    alpha: float
    exact_count: int
    n: int
    bound: float

    @property
    def passed(self) -> bool:
        return self.exact_count <= self.bound

    def as_dict(self) -> dict:
        return {"x": self.x, "alpha": self.alpha, "exact_count": self.exact_count,
                "n": self.n, "bound": self.bound, "pass": self.passed}


def certified_nx_bound(alpha, x, node_budget: int = DEFAULT_BUDGET) -> CountCertificate:
    """Exact |E_x(gamma_alpha)| next to (n+1)^2 exp(pi sqrt(2n/3)), n = floor(log_alpha x)."""
    if x < 1:
        raise ValueError("x must be >= 1")
    count = small_ratio_count(GammaFlow(alpha), x, node_budget)
    n = floor_log(alpha, x)
    return CountCertificate(float(x), float(alpha), count, n, (n + 1) ** 2 * erdos_bound(n))


@dataclass(frozen=True)
class DominationResult:
    passed: bool
    checked: int
    witness: Optional[Word] = None
    value: Optional[float] = None
    bound: Optional[float] = None

    def __bool__(self) -> bool:
        return self.passed


def dary_domination_check(p: PreflowGenerator, d: int, probe_depth: int,
                          rel_tol: float = 1e-12) -> DominationResult:
    """Sort siblings of ``p`` in decreasing order at every node and check the
    result lies below gamma with alpha = d**(1/(d-1)) on all words of height
    at most ``probe_depth``. Words are reported in the sorted tree.
    """
    if d < 2:
        raise ValueError("d must be >= 2")
    if p.max_children is None or p.max_children > d:
        raise ValueError(f"preflow is not {d}-ary (max_children={p.max_children})")
    log_alpha = math.log(d) / (d - 1)
    checked = 0
    # (sorted word, original word, value)
    frontier = [(ROOT, ROOT, 1.0)]
    for _ in range(probe_depth):
        nxt = []
        for sw, ow, _ in frontier:
            vals = [(p.value(ow + (j,)), ow + (j,)) for j in range(1, d + 1)]
            vals.sort(key=lambda t: -t[0])
            for k, (v, child) in enumerate(vals, start=1):
                word = sw + (k,)
                bound = math.exp(-log_alpha * (sum(word) - len(word)))
                checked += 1
                if v > bound * (1 + rel_tol):
                    return DominationResult(False, checked, word, v, bound)
                if v > 0:
                    nxt.append((word, child, v))
        frontier = nxt
    return DominationResult(True, checked)
