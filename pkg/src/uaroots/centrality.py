"""Centrality ranking of tree nodes for root finding.

The centrality of u is the product, over all other nodes v, of the size of
the subtree containing v when the tree is re-rooted at u. Smaller means
more central. That product overflows anything at realistic sizes, so nodes
are ranked by

    log_ratio(u) = log(phi(u) / phi(root))
                 = sum over non-root w on the path root..u of log((n - |w|) / |w|)

where |w| is the size of the subtree below w. A single pass in id order
computes it for every node.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Union

import numpy as np

from ._backend import kernels
from .tree import PlaneTree

EXACT_CAP = 2000
TIE_TOL = 1e-9

NodeRef = Union[int, Iterable[int]]


class ExactCapExceeded(ValueError):
    pass


@lru_cache(maxsize=16)
def log_table(n: int) -> np.ndarray:
    """``log(s)`` for s = 0..n with log(0) set to 0 (never read)."""
    tab = np.zeros(n + 1, dtype=np.float64)
    tab[1:] = np.log(np.arange(1, n + 1, dtype=np.float64))
    tab.setflags(write=False)
    return tab


def log_phi_profile(t: PlaneTree) -> np.ndarray:
    """Natural log of phi(u)/phi(root) for every node id."""
    return kernels.log_ratios(t.parent, t.sizes, log_table(len(t)))


def _node_id(t: PlaneTree, u: NodeRef) -> int:
    if isinstance(u, (int, np.integer)):
        if not 0 <= u < len(t):
            raise IndexError(f"node id {u} out of range")
        return int(u)
    return t.node(u)


def exact_ratio_arrays(parent: np.ndarray, sizes: np.ndarray, i: int) -> Fraction:
    """phi(root)/phi(i) from raw parent and subtree-size arrays, no cap."""
    n = int(sizes[0])
    num = den = 1
    while i != 0:
        s = int(sizes[i])
        num *= s
        den *= n - s
        i = int(parent[i])
    return Fraction(num, den)


def _exact_ratio(t: PlaneTree, i: int) -> Fraction:
    return exact_ratio_arrays(t.parent, t.sizes, i)


def phi_ratio_exact(t: PlaneTree, u: NodeRef, cap: int = EXACT_CAP) -> Fraction:
    """phi(root)/phi(u) as a reduced fraction."""
    if len(t) > cap:
        raise ExactCapExceeded(
            f"tree has {len(t)} nodes, above the exact-arithmetic cap {cap}; use log_phi_profile"
        )
    return _exact_ratio(t, _node_id(t, u))


def _resolve_ties(t: PlaneTree, order: np.ndarray, lr_sorted: np.ndarray) -> np.ndarray:
    close = np.flatnonzero(np.diff(lr_sorted) <= TIE_TOL)
    if close.size == 0:
        return order
    order = order.copy()
    exact = len(t) <= EXACT_CAP
    # runs of adjacent near-equal values
    starts = close[np.r_[True, np.diff(close) > 1]]
    ends = close[np.r_[np.diff(close) > 1, True]] + 2
    for a, b in zip(starts, ends):
        group = order[a:b].tolist()
        if exact:
            # ascending phi(u)/phi(root) is descending root-relative ratio
            group.sort(key=lambda i: (1 / _exact_ratio(t, i), i))
        else:
            group.sort()
        order[a:b] = group
    return order


def rank_nodes(t: PlaneTree, log_ratio: np.ndarray | None = None) -> np.ndarray:
    """Node ids sorted by increasing centrality value, ties by id."""
    lr = log_phi_profile(t) if log_ratio is None else log_ratio
    order = np.lexsort((np.arange(len(t)), lr))
    return _resolve_ties(t, order, lr[order])


def max_subtree_profile(t: PlaneTree) -> np.ndarray:
    """Largest component left after deleting each node (the phi-prime score)."""
    n = len(t)
    sizes = t.sizes
    biggest_child = np.zeros(n, dtype=np.int64)
    np.maximum.at(biggest_child, t.parent[1:], sizes[1:])
    return np.maximum(biggest_child, n - sizes)


def select_roots(t: PlaneTree, k: int, method: str = "phi") -> list[int]:
    """The min(k, |t|) best root candidates, most central first."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if method == "phi":
        ranking = rank_nodes(t)
    elif method == "max_subtree":
        ranking = np.lexsort((np.arange(len(t)), max_subtree_profile(t)))
    else:
        raise ValueError(f"unknown method {method!r}")
    return ranking[:k].tolist()


def central_path_and_phi(t: PlaneTree) -> tuple[list[int], float]:
    """Path from the root along children holding at least half the tree,
    and the log competitive ratio log(phi(root) / min phi).

    Nodes with 2|w| >= n form a chain hanging from the root (two siblings
    cannot both hold half), so the path is just those nodes in id order.
    """
    n = len(t)
    sizes = t.sizes
    heavy = np.flatnonzero(2 * sizes[1:] >= n) + 1
    tab = log_table(n)
    log_phi = float(np.sum(tab[sizes[heavy]] - tab[n - sizes[heavy]])) if heavy.size else 0.0
    return [0] + heavy.tolist(), log_phi


def root_rank(t: PlaneTree, log_ratio: np.ndarray | None = None) -> int:
    """Number of nodes ranked ahead of the root.

    The root is in the output of the size-K algorithm iff this is < K.
    """
    lr = log_phi_profile(t) if log_ratio is None else log_ratio
    return _root_rank(t.parent, t.sizes, lr)


def _root_rank(parent, sizes, lr) -> int:
    ahead = int(np.count_nonzero(lr < -TIE_TOL))
    if len(parent) <= EXACT_CAP:
        band = np.flatnonzero(np.abs(lr[1:]) <= TIE_TOL) + 1
        ahead += sum(1 for i in band.tolist() if exact_ratio_arrays(parent, sizes, i) > 1)
    return ahead


def root_rank_from_parents(parent: np.ndarray) -> int:
    """root_rank for a bare parent array (parents precede children)."""
    sizes = kernels.subtree_sizes(parent)
    lr = kernels.log_ratios(parent, sizes, log_table(len(parent)))
    return _root_rank(parent, sizes, lr)


def log_phi_from_parents(parent: np.ndarray) -> float:
    """log of the competitive ratio for a bare parent array."""
    n = len(parent)
    sizes = kernels.subtree_sizes(parent)
    heavy = sizes[1:][2 * sizes[1:] >= n]
    tab = log_table(n)
    return float(np.sum(tab[heavy] - tab[n - heavy]))


def competitor_count(t: PlaneTree, log_ratio: np.ndarray | None = None) -> tuple[int, list[int]]:
    """Nodes at least as central as the root (root included)."""
    lr = log_phi_profile(t) if log_ratio is None else log_ratio
    members = set(np.flatnonzero(lr < -TIE_TOL).tolist())
    band = np.flatnonzero(np.abs(lr) <= TIE_TOL)
    members.update(i for i in band.tolist() if i == 0 or _exact_ratio(t, i) >= 1)
    out = sorted(members)
    return len(out), out


@dataclass(frozen=True)
class CentralityReport:
    log_ratio: np.ndarray
    ranking: np.ndarray
    central_path: list[int]
    log_Phi: float

    def top(self, k: int) -> list[int]:
        return self.ranking[:k].tolist()


def centrality_report(t: PlaneTree) -> CentralityReport:
    lr = log_phi_profile(t)
    path, log_phi = central_path_and_phi(t)
    return CentralityReport(lr, rank_nodes(t, lr), path, log_phi)
