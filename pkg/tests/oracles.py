"""Independent reference implementations used only by the tests.

Everything here is deliberately naive: adjacency lists, explicit rerooting,
exhaustive enumeration. None of it shares code with the package.
"""
from __future__ import annotations

import itertools
from fractions import Fraction


def adjacency(parent):
    adj = [[] for _ in parent]
    for i, p in enumerate(parent):
        if p >= 0:
            adj[i].append(int(p))
            adj[int(p)].append(i)
    return adj


def phi(parent, u):
    """Product over v != u of the size of the subtree of v when rooted at u."""
    adj = adjacency(parent)
    order, par = [u], {u: -1}
    for x in order:
        for y in adj[x]:
            if y != par[x]:
                par[y] = x
                order.append(y)
    size = {}
    for x in reversed(order):
        size[x] = 1 + sum(size[y] for y in adj[x] if y != par[x])
    out = 1
    for v in order[1:]:
        out *= size[v]
    return out


def phi_all(parent):
    return [phi(parent, u) for u in range(len(parent))]


def max_component(parent, u):
    """Largest component of the tree with u deleted."""
    adj = adjacency(parent)
    n = len(parent)
    best = 0
    for start in adj[u]:
        seen = {u, start}
        stack = [start]
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        best = max(best, len(seen) - 1)
    return best if n > 1 else 0


def partitions_brute(s):
    """Number of partitions of s by listing non-increasing tuples."""
    def gen(rem, cap):
        if rem == 0:
            yield ()
            return
        for first in range(min(rem, cap), 0, -1):
            for rest in gen(rem - first, first):
                yield (first,) + rest
    return sum(1 for _ in gen(s, s))


def gamma_members_arith(alpha, x, max_len, max_letter):
    """Words with x * prod gamma/2 >= 1, by checking every word in a box."""
    alpha, x = Fraction(alpha), Fraction(x)
    out = {()}
    for h in range(1, max_len + 1):
        for w in itertools.product(range(1, max_letter + 1), repeat=h):
            # exponent of alpha: sum over prefixes of (letters - 1)
            e = sum((h - i) * (w[i] - 1) for i in range(h))
            if x * alpha ** -e / 2 ** h >= 1:
                out.add(w)
    return out
