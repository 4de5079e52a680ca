"""Plane trees stored as dense parent/birth-rank arrays.

Node ids are creation order: the root is 0 and every parent id is smaller
than its child's id. Words are derived on demand.
"""
from __future__ import annotations

import io
from functools import cached_property
from typing import Iterable, TextIO

import numpy as np

from ._backend import kernels
from .words import ROOT, Word, check_word, validate_plane_tree


class InvalidTree(ValueError):
    """Input does not describe a plane tree."""

    def __init__(self, message, condition=None, witness=None):
        super().__init__(message)
        self.condition = condition
        self.witness = witness


def _frozen(a):
    a = np.ascontiguousarray(a, dtype=np.int64)
    a.setflags(write=False)
    return a


class PlaneTree:
    """Immutable rooted ordered tree.

    ``parent[i]`` is the id of node i's parent (-1 for the root) and
    ``rank[i]`` its birth rank among its siblings, i.e. the last letter of
    its word. Sizes, words and child lists are computed lazily and cached.
    """

    __slots__ = ("parent", "rank", "__dict__")

    def __init__(self, parent, rank, *, check: bool = True):
        self.parent = _frozen(parent)
        self.rank = _frozen(rank)
        if check:
            self._check()

    def _check(self):
        parent, rank = self.parent, self.rank
        n = parent.shape[0]
        if n == 0:
            raise InvalidTree("empty tree has no root", "a", ROOT)
        if rank.shape != parent.shape:
            raise InvalidTree("parent and rank arrays differ in length")
        if parent[0] != -1 or rank[0] != 0:
            raise InvalidTree("node 0 must be the root (parent -1, rank 0)", "a", ROOT)
        ids = np.arange(1, n)
        bad = np.flatnonzero((parent[1:] < 0) | (parent[1:] >= ids))
        if bad.size:
            i = int(bad[0]) + 1
            raise InvalidTree(f"node {i} has parent {parent[i]}; parents must precede children", "b")
        if n > 1 and rank[1:].min() < 1:
            i = int(np.argmin(rank[1:])) + 1
            raise InvalidTree(f"node {i} has birth rank {rank[i]}; ranks start at 1", "c")
        if n > 1:
            order = np.lexsort((rank[1:], parent[1:]))
            p = parent[1:][order]
            r = rank[1:][order]
            start = np.r_[True, p[1:] != p[:-1]]
            group_start = np.maximum.accumulate(np.where(start, np.arange(p.size), 0))
            expected = np.arange(p.size) - group_start + 1
            if not np.array_equal(r, expected):
                # rebuild words to name the violated condition and a witness
                result = validate_plane_tree(_words_unchecked(parent, rank))
                raise InvalidTree(
                    f"not a plane tree: condition ({result.condition}) fails at {result.witness}",
                    result.condition,
                    result.witness,
                )

    # construction -------------------------------------------------------

    @classmethod
    def from_parents(cls, parent) -> "PlaneTree":
        """Tree whose children are ordered by id (birth order)."""
        parent = np.ascontiguousarray(parent, dtype=np.int64)
        return cls(parent, kernels.birth_ranks(parent))

    @classmethod
    def from_words(cls, words: Iterable[Iterable[int]]) -> "PlaneTree":
        ws = {check_word(w) for w in words}
        result = validate_plane_tree(ws)
        if not result:
            raise InvalidTree(
                f"not a plane tree: condition ({result.condition}) fails at {result.witness}",
                result.condition,
                result.witness,
            )
        ordered = sorted(ws, key=lambda w: (len(w), w))
        index = {w: i for i, w in enumerate(ordered)}
        parent = [-1] + [index[w[:-1]] for w in ordered[1:]]
        rank = [0] + [w[-1] for w in ordered[1:]]
        return cls(parent, rank, check=False)

    # structure ----------------------------------------------------------

    def __len__(self) -> int:
        return int(self.parent.shape[0])

    @property
    def n(self) -> int:
        return len(self)

    @cached_property
    def sizes(self) -> np.ndarray:
        """Subtree size of every node (the root's is ``len(self)``)."""
        return _frozen(kernels.subtree_sizes(self.parent))

    @cached_property
    def _weights_heights(self):
        return kernels.weights_heights(self.parent, self.rank)

    @property
    def weights(self) -> np.ndarray:
        return self._weights_heights[0]

    @property
    def heights(self) -> np.ndarray:
        return self._weights_heights[1]

    @cached_property
    def _csr(self):
        n = len(self)
        if n == 1:
            return np.zeros(2, dtype=np.int64), np.zeros(0, dtype=np.int64)
        order = np.lexsort((self.rank[1:], self.parent[1:])) + 1
        counts = np.bincount(self.parent[1:], minlength=n)
        offsets = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=offsets[1:])
        return offsets, order.astype(np.int64)

    def children(self, i: int) -> np.ndarray:
        """Child ids of node ``i`` ordered by birth rank."""
        offsets, order = self._csr
        return order[offsets[i] : offsets[i + 1]]

    def child_counts(self) -> np.ndarray:
        return np.diff(self._csr[0])

    def leaves(self) -> np.ndarray:
        return np.flatnonzero(self.child_counts() == 0)

    @cached_property
    def words(self) -> list[Word]:
        return _words_unchecked(self.parent, self.rank)

    def word(self, i: int) -> Word:
        return self.words[i]

    @cached_property
    def _index(self) -> dict[Word, int]:
        return {w: i for i, w in enumerate(self.words)}

    def node(self, w: Iterable[int]) -> int:
        """Id of the node with word ``w``."""
        try:
            return self._index[tuple(w)]
        except KeyError:
            raise KeyError(f"word {tuple(w)} is not in the tree") from None

    def __contains__(self, w) -> bool:
        return tuple(w) in self._index

    def to_words(self) -> set[Word]:
        return set(self.words)

    def path_to_root(self, i: int) -> list[int]:
        """Ids from node ``i`` up to and including the root."""
        out = [int(i)]
        parent = self.parent
        while out[-1] != 0:
            out.append(int(parent[out[-1]]))
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, PlaneTree):
            return NotImplemented
        return np.array_equal(self.parent, other.parent) and np.array_equal(self.rank, other.rank)

    __hash__ = None

    def __repr__(self) -> str:
        return f"PlaneTree(n={len(self)})"

    # serialization ------------------------------------------------------

    def dump(self, fp: TextIO) -> None:
        """One line per node: ``id parent_id birth_rank``."""
        for i, (p, r) in enumerate(zip(self.parent.tolist(), self.rank.tolist())):
            fp.write(f"{i} {p} {r}\n")

    def dumps(self) -> str:
        buf = io.StringIO()
        self.dump(buf)
        return buf.getvalue()

    @classmethod
    def load(cls, fp: TextIO) -> "PlaneTree":
        rows = []
        for lineno, line in enumerate(fp, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 3:
                raise InvalidTree(f"line {lineno}: expected 'id parent_id birth_rank'")
            try:
                rows.append(tuple(int(x) for x in parts))
            except ValueError:
                raise InvalidTree(f"line {lineno}: non-integer field") from None
        if not rows:
            raise InvalidTree("empty tree has no root", "a", ROOT)
        rows.sort()
        ids = [r[0] for r in rows]
        if ids != list(range(len(rows))):
            raise InvalidTree("node ids must be dense 0..n-1 without duplicates")
        parent = np.array([r[1] for r in rows], dtype=np.int64)
        rank = np.array([r[2] for r in rows], dtype=np.int64)
        return cls(parent, rank)

    @classmethod
    def loads(cls, text: str) -> "PlaneTree":
        return cls.load(io.StringIO(text))


def _words_unchecked(parent, rank) -> list[Word]:
    # assumes parent ids precede child ids
    par = np.asarray(parent).tolist()
    rk = np.asarray(rank).tolist()
    words: list[Word] = [ROOT] * len(par)
    for i in range(1, len(par)):
        words[i] = words[par[i]] + (rk[i],)
    return words


def subtree_sizes(t: PlaneTree) -> dict[Word, int]:
    """Map every word of ``t`` to the size of its subtree."""
    return dict(zip(t.words, t.sizes.tolist()))


def path_tree(n: int) -> PlaneTree:
    return PlaneTree(np.arange(-1, n - 1), np.r_[0, np.ones(n - 1, dtype=np.int64)])


def star_tree(leaves: int) -> PlaneTree:
    return PlaneTree(np.r_[-1, np.zeros(leaves, dtype=np.int64)], np.arange(leaves + 1))
