"""Seeded simulators for uniform attachment trees and Polya urns."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from ._backend import kernels
from .tree import PlaneTree

SeedLike = Union[int, np.random.Generator, np.random.SeedSequence, None]

MODELS = ("UA", "UA_regular")


def trial_rng(master_seed: int, trial: int, stream: int = 0) -> np.random.Generator:
    """Generator for one trial, a pure function of (master seed, trial index, stream).

    Streams are independent of how trials are scheduled across workers.
    """
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(trial), int(stream)))
    return np.random.Generator(np.random.PCG64(ss))


def as_generator(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class GrowthConfig:
    model: str
    n: int
    seed: int = 0
    d: Optional[int] = None

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}; expected one of {MODELS}")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.model == "UA_regular" and (self.d is None or self.d < 2):
            raise ValueError("UA_regular needs d >= 2")

    def grow(self) -> PlaneTree:
        return grow(self.model, self.n, self.seed, d=self.d)


def ua_parent_array(n: int, rng: np.random.Generator) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be >= 1")
    return kernels.ua_parents(rng.random(n - 1))


def grow_ua(n: int, seed: SeedLike = None) -> PlaneTree:
    """Uniform attachment tree with ``n`` nodes.

    Node k (k >= 1) attaches to a uniform choice among nodes 0..k-1 and
    becomes its next-born child.
    """
    parent = ua_parent_array(n, as_generator(seed))
    return PlaneTree(parent, kernels.birth_ranks(parent), check=False)


def ua_regular_arrays(d: int, n: int, rng: np.random.Generator):
    if d < 2:
        raise ValueError("d must be >= 2")
    if n < 1:
        raise ValueError("n must be >= 1")
    return kernels.ua_regular_tree(d, rng.random(n - 1))


def grow_ua_regular(d: int, n: int, seed: SeedLike = None) -> PlaneTree:
    """(d+1)-regular uniform attachment plane tree after ``n`` growth steps.

    Starts from the root with d+1 leaf children; each later step picks a
    uniform leaf and gives it children 1..d. The result has d*n + 2 nodes
    and (d-1)*n + 2 leaves.
    """
    parent, rank = ua_regular_arrays(d, n, as_generator(seed))
    return PlaneTree(parent, rank, check=False)


def grow(model: str, n: int, seed: SeedLike = None, d: Optional[int] = None) -> PlaneTree:
    if model == "UA":
        return grow_ua(n, seed)
    if model == "UA_regular":
        if d is None:
            raise ValueError("UA_regular needs d")
        return grow_ua_regular(d, n, seed)
    raise ValueError(f"unknown model {model!r}")


def tree_size(model: str, n: int, d: Optional[int] = None) -> int:
    return n if model == "UA" else d * n + 2


@dataclass
class UrnState:
    counts: np.ndarray
    replacement: int
    draws_so_far: int
    initial_total: int
    trajectory: np.ndarray = field(default_factory=lambda: np.zeros((0, 0), dtype=np.int64))

    def __post_init__(self):
        assert int(self.counts.sum()) == self.initial_total + self.draws_so_far * self.replacement

    @property
    def fractions(self) -> np.ndarray:
        return self.counts / self.counts.sum()


def polya_urn(
    initial_counts: Sequence[int],
    replacement: int,
    draws: int,
    seed: SeedLike = None,
    thin: int = 0,
) -> UrnState:
    """Draw a ball with probability proportional to counts, return it plus
    ``replacement`` balls of its colour; repeat ``draws`` times.

    With ``thin > 0`` the state after every ``thin`` draws is recorded in
    ``trajectory``.
    """
    counts = np.asarray(initial_counts, dtype=np.int64)
    if counts.ndim != 1 or counts.size == 0:
        raise ValueError("need at least one colour")
    if (counts < 1).any():
        raise ValueError("initial counts must be >= 1")
    if replacement < 1:
        raise ValueError("replacement must be >= 1")
    if draws < 0:
        raise ValueError("draws must be >= 0")
    u = as_generator(seed).random(draws)
    final, traj = kernels.polya_urn(counts, int(replacement), u, int(thin))
    return UrnState(final, int(replacement), int(draws), int(counts.sum()), traj)
