"""Ulam-Harris words: node addresses as tuples of positive integers.

The empty tuple is the root. ``(2, 1, 3)`` is the third child of the first
child of the second child of the root.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Tuple

Word = Tuple[int, ...]

ROOT: Word = ()


def check_word(w: Iterable[int]) -> Word:
    w = tuple(w)
    for letter in w:
        if int(letter) != letter or letter < 1:
            raise ValueError(f"word letters must be positive integers, got {w!r}")
    return w


def parent(w: Word) -> Word:
    if not w:
        raise ValueError("the root has no parent")
    return w[:-1]


def word_weight(w: Word) -> int:
    """Sum of the letters; 0 for the root."""
    return sum(w)


def word_height(w: Word) -> int:
    return len(w)


def word_r(w: Word) -> int:
    """Number of letters >= 2, i.e. ancestral steps that are not to an oldest child."""
    return sum(1 for letter in w if letter >= 2)


def is_ancestor(u: Word, v: Word) -> bool:
    """True iff ``u`` is a prefix of ``v`` (every word is its own ancestor)."""
    return len(u) <= len(v) and v[: len(u)] == u


def ancestors(w: Word) -> Iterator[Word]:
    """Non-root ancestors of ``w`` from the top down, ending with ``w`` itself."""
    for i in range(1, len(w) + 1):
        yield w[:i]


def compositions(m: int) -> Iterator[Word]:
    # lexicographic: smallest first letter first
    if m == 0:
        yield ()
        return
    for first in range(1, m + 1):
        for rest in compositions(m - first):
            yield (first,) + rest


def enumerate_weight_class(m: int) -> list[Word]:
    """All words of weight exactly ``m`` in lexicographic order (2**(m-1) of them)."""
    if m < 1:
        raise ValueError("weight class is defined for m >= 1")
    return list(compositions(m))


@dataclass(frozen=True)
class Validation:
    valid: bool
    condition: Optional[str] = None  # "a", "b" or "c"
    witness: Optional[Word] = None

    def __bool__(self) -> bool:
        return self.valid


def validate_plane_tree(words: Iterable[Iterable[int]]) -> Validation:
    """Check that a finite word set is a plane tree.

    (a) the root is present; (b) every parent is present; (c) child indices
    of each node are gapless, 1..k. The first violation in breadth-first
    order (by height, then lexicographically) is reported.
    """
    ws = {check_word(w) for w in words}
    if ROOT not in ws:
        return Validation(False, "a", ROOT)
    for w in sorted(ws, key=lambda x: (len(x), x)):
        if not w:
            continue
        if w[:-1] not in ws:
            return Validation(False, "b", w)
        if w[-1] > 1 and w[:-1] + (w[-1] - 1,) not in ws:
            return Validation(False, "c", w)
    return Validation(True)
