import itertools
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from qdim import symbolic as sy
from qdim.exceptions import DomainError, SizeLimitError

words = st.lists(st.sampled_from(sy.ALPHABET), max_size=14).map(tuple)


def test_project_examples():
    assert sy.project((1, 0)) == 1.0
    assert sy.project((0, 3)) == 1.0
    assert sy.project((3,)) == 3.0
    assert sy.project_exact((1, 1, 3)) == Fraction(5, 3)
    assert sy.project(()) == 0.0


def test_cylinder_interval_examples():
    assert sy.cylinder_interval(()) == (0.0, 4.5)
    assert sy.cylinder_interval((1,)) == (1.0, 2.5)
    assert sy.cylinder_interval((1, 0)) == (1.0, 1.5)


def test_enumerate_words_counts():
    assert sy.enumerate_words(1, "A") == [(0,), (1,), (3,)]
    two = sy.enumerate_words(2, "A")
    assert len(two) == 8 and (0, 3) not in two
    assert [len(sy.enumerate_words(n, "A")) for n in range(1, 5)] == [3, 8, 21, 55]
    assert len(sy.enumerate_words(3, "full")) == 27
    assert sy.enumerate_words(3, "A") == sorted(sy.enumerate_words(3, "A"))
    assert len(sy.enumerate_words(4, "B")) == 55


def test_enumerate_words_cap():
    with pytest.raises(SizeLimitError, match="16"):
        sy.enumerate_words(17)


def test_canonicalize_examples():
    assert sy.canonicalize((0, 0, 3)) == (0, 1, 0)
    assert sy.canonicalize((0, 3, 3, 1)) == (1, 1, 0, 1)
    assert sy.canonicalize((3, 1, 0)) == (3, 1, 0)


@given(words)
def test_canonicalize_invariants(w):
    c = sy.canonicalize(w)
    assert len(c) == len(w)
    assert sy.project_exact(c) == sy.project_exact(w)
    assert sy.is_admissible(c, "A")
    assert sy.canonicalize(c) == c
    b = sy.canonicalize(w, "B")
    assert sy.is_admissible(b, "B") and sy.project_exact(b) == sy.project_exact(w)


def test_fibers_partition_and_projections_distinct():
    for n in range(1, 7):
        fibers = {}
        for eta in itertools.product(sy.ALPHABET, repeat=n):
            fibers.setdefault(sy.canonicalize(eta), []).append(eta)
        assert sorted(fibers) == sy.enumerate_words(n, "A")
        pts = {sy.project_exact(i) for i in fibers}
        assert len(pts) == len(fibers)


def test_non_commutation_witnesses():
    assert sy.canonicalize(sy.shift((0, 3), 1)) == (3,)
    assert sy.shift(sy.canonicalize((0, 3)), 1) == (0,)
    w = (0, 0, 3)
    assert sy.canonicalize(sy.truncate(w, 2)) != sy.truncate(sy.canonicalize(w), 2)


def test_decompose_blocks_examples():
    b = sy.decompose_blocks((1, 1, 0, 3))
    assert b.good == ((1, 3),)
    assert b["D_Good"] == (3, 4)
    assert b.chi_block == 3
    b = sy.decompose_blocks((0, 3, 3, 1))
    assert b.bad == ((1, 3),) and b.good == ()
    b = sy.decompose_blocks((3, 3))
    assert b.good == () and b.bad == () and b.chi_block == 0


@given(words)
def test_index_sets_partition(w):
    b = sy.decompose_blocks(w)
    full = set(range(1, len(w) + 1))
    for kind in ("Good", "Bad"):
        c, d = set(b[f"C_{kind}"]), set(b[f"D_{kind}"])
        assert c | d == full and not c & d
    for k, l in b.good + b.bad:
        assert l >= k + 1


def test_full_overlap_pair():
    assert sy.full_overlap_pair(2) == ((1, 0), (0, 3))
    u, v = sy.full_overlap_pair(3)
    assert (u, v) == ((1, 1, 0), (0, 3, 3))
    assert sy.project_exact(u) == sy.project_exact(v) == Fraction(4, 3)
    assert sy.full_overlap_pair(4) == ((1, 1, 1, 0), (0, 3, 3, 3))
    with pytest.raises(DomainError):
        sy.full_overlap_pair(1)


def test_interval_neighbor():
    assert sy.interval_neighbor((1, 0)) == (1, 1)
    assert sy.interval_neighbor((3, 3)) is None
    with pytest.raises(DomainError):
        sy.interval_neighbor((0, 3))
    for n in range(1, 6):
        for w in sy.enumerate_words(n, "A"):
            nb = sy.interval_neighbor(w)
            if w[-1] == 3:
                assert nb is None
            if nb is not None:
                assert nb[:-1] == w[:-1] and {w[-1], nb[-1]} == {0, 1}
                assert sy.intervals_intersect(w, nb)


def test_shift_and_text_format():
    assert sy.shift((0, 3), 1) == (3,)
    assert sy.shift((1, 1, 0, 3), 3) == (3,)
    assert sy.shift((1, 0), 0) == (1, 0)
    with pytest.raises(DomainError):
        sy.shift((1,), 2)
    assert sy.format_word(()) == "-"
    assert sy.parse_word("103") == (1, 0, 3)
    assert sy.parse_word(sy.format_word(())) == ()


def test_invalid_digits_rejected():
    with pytest.raises(DomainError):
        sy.as_word((0, 2))
