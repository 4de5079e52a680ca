import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from uaroots.growth import grow_ua, grow_ua_regular
from uaroots.tree import InvalidTree, PlaneTree, path_tree, star_tree, subtree_sizes
from uaroots.words import (enumerate_weight_class, is_ancestor, validate_plane_tree,
                           word_height, word_r, word_weight)


def test_word_statistics():
    assert word_weight(()) == 0
    assert word_weight((2, 1, 3)) == 6
    assert word_height((2, 1, 3)) == 3
    assert word_r((1, 2, 1, 3)) == 2
    assert is_ancestor((), (4,))
    assert is_ancestor((2,), (2, 1))
    assert not is_ancestor((2, 1), (2,))


def test_weight_classes():
    assert enumerate_weight_class(1) == [(1,)]
    assert enumerate_weight_class(3) == [(1, 1, 1), (1, 2), (2, 1), (3,)]
    for m in range(1, 11):
        ws = enumerate_weight_class(m)
        assert len(ws) == 2 ** (m - 1)
        assert ws == sorted(ws)
        assert all(sum(w) == m for w in ws)
    with pytest.raises(ValueError):
        enumerate_weight_class(0)


@pytest.mark.parametrize("words,cond,witness", [
    ([(1,)], "a", ()),
    ([(), (1, 1)], "b", (1, 1)),
    ([(), (2,)], "c", (2,)),
    ([(), (1,), (1, 3), (1, 1)], "c", (1, 3)),
])
def test_validation_reports_condition(words, cond, witness):
    res = validate_plane_tree(words)
    assert not res
    assert (res.condition, res.witness) == (cond, witness)


def test_validation_accepts_plane_trees():
    assert validate_plane_tree([(), (1,), (2,), (1, 1)])
    assert validate_plane_tree([()])


def test_from_words_round_trip():
    ws = {(), (1,), (2,), (3,), (2, 1), (2, 2), (2, 2, 1)}
    t = PlaneTree.from_words(ws)
    assert t.to_words() == ws
    assert len(t) == 7
    sizes = subtree_sizes(t)
    assert sizes[()] == 7 and sizes[(2,)] == 4 and sizes[(2, 2)] == 2 and sizes[(3,)] == 1
    assert t.word(int(t.node((2, 2, 1)))) == (2, 2, 1)
    assert [t.word(c) for c in t.children(t.node((2,)))] == [(2, 1), (2, 2)]
    with pytest.raises(InvalidTree) as exc:
        PlaneTree.from_words([(), (2,)])
    assert exc.value.condition == "c"


def test_array_validation():
    with pytest.raises(InvalidTree):
        PlaneTree([0, 0], [0, 1])  # no root
    with pytest.raises(InvalidTree):
        PlaneTree([-1, 2, 0], [0, 1, 1])  # parent after child
    with pytest.raises(InvalidTree) as exc:
        PlaneTree([-1, 0, 0], [0, 1, 3])  # gap in birth ranks
    assert exc.value.condition == "c"
    with pytest.raises(InvalidTree):
        PlaneTree([], [])


def test_serialization_round_trip(tmp_path):
    t = grow_ua(50, 4)
    assert PlaneTree.loads(t.dumps()) == t
    p = tmp_path / "tree.txt"
    with open(p, "w") as fp:
        t.dump(fp)
    with open(p) as fp:
        assert PlaneTree.load(fp) == t
    text = "# a tree\n0 -1 0\n\n2 0 2  # comment\n1 0 1\n"
    assert PlaneTree.loads(text).to_words() == {(), (1,), (2,)}
    with pytest.raises(InvalidTree):
        PlaneTree.loads("0 -1 0\n2 0 1\n")
    with pytest.raises(InvalidTree):
        PlaneTree.loads("0 -1\n")
    with pytest.raises(InvalidTree):
        PlaneTree.loads("")


def test_small_shapes():
    p = path_tree(3)
    assert p.to_words() == {(), (1,), (1, 1)}
    s = star_tree(3)
    assert s.to_words() == {(), (1,), (2,), (3,)}
    assert list(s.leaves()) == [1, 2, 3]
    assert list(s.child_counts()) == [3, 0, 0, 0]


def test_weights_and_heights_match_words():
    t = grow_ua_regular(3, 40, 1)
    for i, w in enumerate(t.words):
        assert t.weights[i] == sum(w)
        assert t.heights[i] == len(w)


def test_arrays_are_read_only():
    t = grow_ua(10, 0)
    with pytest.raises(ValueError):
        t.parent[1] = 0
    with pytest.raises(ValueError):
        t.sizes[0] = 3


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 300), st.integers(0, 2 ** 32 - 1))
def test_words_valid_and_sizes_consistent(n, seed):
    t = grow_ua(n, seed)
    assert validate_plane_tree(t.words)
    PlaneTree(t.parent, t.rank)  # full validation passes
    sizes = t.sizes
    # size = 1 + sum of children sizes
    acc = np.ones(len(t), dtype=np.int64)
    np.add.at(acc, t.parent[1:], sizes[1:])
    assert np.array_equal(acc, sizes)
    assert PlaneTree.from_words(t.words).to_words() == set(t.words)
