"""Words over the digit alphabet {0, 1, 3} and the overlapping IFS x/3 + i.

A word is a plain tuple of ints. The digits are stored literally (0, 1, 3)
so that the natural projection is a direct sum. Two subshifts of finite
type are used: branch ``"A"`` forbids the factor (0, 3) and branch ``"B"``
forbids (1, 0). Length-n words of the two branches are called T_n and U_n.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .exceptions import DomainError, SizeLimitError

ALPHABET = (0, 1, 3)
EMPTY_WORD = ()
ENUMERATION_CAP = 16

#: Rows and columns indexed by the digits 0, 1, 3.
ADJACENCY_A = np.array([[1, 1, 0], [1, 1, 1], [1, 1, 1]], dtype=np.int64)
ADJACENCY_B = np.array([[1, 1, 1], [0, 1, 1], [1, 1, 1]], dtype=np.int64)

_FORBIDDEN = {"A": (0, 3), "B": (1, 0)}


@dataclass(frozen=True)
class SystemConfig:
    """The fixed IFS {x/3 + i : i in (0, 1, 3)} and its convex hull."""

    contraction: Fraction = Fraction(1, 3)
    translations: tuple = ALPHABET
    hull_left: Fraction = Fraction(0)
    hull_right: Fraction = Fraction(9, 2)

    @property
    def hull_width(self) -> Fraction:
        return self.hull_right - self.hull_left


SYSTEM = SystemConfig()
HULL_WIDTH = 4.5


def as_word(w: Iterable[int]) -> tuple:
    """Coerce ``w`` to a word tuple, rejecting digits outside {0, 1, 3}."""
    if isinstance(w, str):
        return parse_word(w)
    word = tuple(int(d) for d in w)
    for d in word:
        if d not in (0, 1, 3):
            raise DomainError(f"digit {d!r} is not in the alphabet {{0, 1, 3}}")
    return word


def format_word(w: Sequence[int]) -> str:
    """Render a word as concatenated digits; the empty word renders as ``-``."""
    return "".join(str(d) for d in w) if len(w) else "-"


def parse_word(text: str) -> tuple:
    text = text.strip()
    if text in ("-", ""):
        return EMPTY_WORD
    return as_word(int(c) for c in text)


def is_admissible(w: Sequence[int], branch: str = "A") -> bool:
    """True when ``w`` avoids the forbidden factor of ``branch``."""
    if branch == "full":
        return True
    bad = _FORBIDDEN[branch]
    return all((w[k], w[k + 1]) != bad for k in range(len(w) - 1))


def project(w: Sequence[int]) -> float:
    """Natural projection: the left endpoint of the cylinder interval of ``w``."""
    x = 0.0
    for d in reversed(w):
        x = d + x / 3.0
    return x


def project_exact(w: Sequence[int]) -> Fraction:
    return Fraction(project_scaled(w), 3 ** (len(w) - 1)) if w else Fraction(0)


def project_scaled(w: Sequence[int]) -> int:
    """Integer ``3**(n-1) * project(w)`` for a word of length n >= 1."""
    x = 0
    for d in w:
        x = 3 * x + d
    return x


def cylinder_interval(w: Sequence[int]) -> tuple[float, float]:
    left = project(w)
    return left, left + HULL_WIDTH * 3.0 ** (-len(w))


def shift(w: Sequence[int], z: int) -> tuple:
    """Drop the first ``z`` digits."""
    if not 0 <= z <= len(w):
        raise DomainError(f"shift amount {z} outside [0, {len(w)}]")
    return tuple(w[z:])


def truncate(w: Sequence[int], z: int) -> tuple:
    if not 0 <= z <= len(w):
        raise DomainError(f"truncation length {z} outside [0, {len(w)}]")
    return tuple(w[:z])


def drop_last(w: Sequence[int]) -> tuple:
    """The word with its final digit removed."""
    if not w:
        raise DomainError("the empty word has no last digit")
    return tuple(w[:-1])


def enumerate_words(n: int, branch: str = "A", cap: int = ENUMERATION_CAP) -> list:
    """All length-``n`` words of ``branch`` (``"A"``, ``"B"`` or ``"full"``), sorted.

    Raises
    ------
    SizeLimitError
        If ``n`` exceeds ``cap``.
    """
    if n < 1:
        raise DomainError("word length must be positive")
    if n > cap:
        raise SizeLimitError(f"enumeration length {n} exceeds the cap of {cap}", cap=cap)
    if branch not in ("A", "B", "full"):
        raise DomainError(f"unknown branch {branch!r}")
    bad = _FORBIDDEN.get(branch)
    words = [(d,) for d in ALPHABET]
    for _ in range(n - 1):
        words = [
            w + (d,)
            for w in words
            for d in ALPHABET
            if bad is None or (w[-1], d) != bad
        ]
    return words


def count_words(n: int, branch: str = "A") -> int:
    """Number of admissible length-``n`` words via powers of the adjacency matrix."""
    if branch == "full":
        return 3**n
    M = ADJACENCY_A if branch == "A" else ADJACENCY_B
    v = np.ones(3, dtype=object)
    Mo = M.astype(object)
    for _ in range(n - 1):
        v = Mo.dot(v)
    return int(sum(v))


def _bad_blocks(w: Sequence[int]) -> list:
    """Maximal runs (0, 3, ..., 3) as 1-based inclusive [k, l], l > k.

    A run that reaches the end of a finite word counts as maximal.
    """
    n = len(w)
    blocks = []
    k = 0
    while k < n:
        if w[k] == 0 and k + 1 < n and w[k + 1] == 3:
            l = k + 1
            while l + 1 < n and w[l + 1] == 3:
                l += 1
            blocks.append((k + 1, l + 1))
            k = l + 1
        else:
            k += 1
    return blocks


def _good_blocks(w: Sequence[int]) -> list:
    """Maximal runs (1, ..., 1, 0) of length >= 2 as 1-based inclusive [k, l]."""
    blocks = []
    run = 0
    for pos, d in enumerate(w):
        if d == 1:
            run += 1
        else:
            if d == 0 and run:
                blocks.append((pos + 1 - run, pos + 1))
            run = 0
    return blocks


def canonicalize(w: Sequence[int], branch: str = "A") -> tuple:
    """Map ``w`` to the unique word of ``branch`` with the same projection.

    Branch A rewrites every maximal (0, 3^m) into (1^m, 0); branch B rewrites
    every maximal (1^m, 0) into (0, 3^m). Length and projection are kept.
    """
    out = list(w)
    if branch == "A":
        for k, l in _bad_blocks(w):
            out[k - 1 : l - 1] = [1] * (l - k)
            out[l - 1] = 0
    elif branch == "B":
        for k, l in _good_blocks(w):
            out[k - 1] = 0
            out[k:l] = [3] * (l - k)
    else:
        raise DomainError(f"unknown branch {branch!r}")
    return tuple(out)


@dataclass(frozen=True)
class BlockPartition:
    """Maximal good/bad blocks of a word and the derived index sets.

    Ranges are 1-based and inclusive. ``chi_block`` is the largest right
    endpoint of a good block, or 0 when there is none.
    """

    length: int
    good: tuple
    bad: tuple
    index_sets: dict = field(default_factory=dict)

    @property
    def chi_block(self) -> int:
        return max((l for _, l in self.good), default=0)

    def __getitem__(self, name: str) -> tuple:
        return self.index_sets[name]


def _index_sets(n: int, blocks, suffix: str) -> dict:
    covered = set()
    right = set()
    inner = set()
    for k, l in blocks:
        covered.update(range(k, l + 1))
        right.add(l)
        inner.update(range(k, l))
    rest = set(range(1, n + 1)) - covered
    return {
        f"A_{suffix}": tuple(sorted(rest)),
        f"B_{suffix}": tuple(sorted(right)),
        f"C_{suffix}": tuple(sorted(inner)),
        f"D_{suffix}": tuple(sorted(rest | right)),
    }


def decompose_blocks(w: Sequence[int]) -> BlockPartition:
    good = tuple(_good_blocks(w))
    bad = tuple(_bad_blocks(w))
    sets = _index_sets(len(w), good, "Good")
    sets.update(_index_sets(len(w), bad, "Bad"))
    return BlockPartition(length=len(w), good=good, bad=bad, index_sets=sets)


def full_overlap_pair(n: int) -> tuple[tuple, tuple]:
    """The pair (1^(n-1) 0, 0 3^(n-1)) of distinct words with equal projection."""
    if n < 2:
        raise DomainError("full overlap pairs need n >= 2")
    return (1,) * (n - 1) + (0,), (0,) + (3,) * (n - 1)


def intervals_intersect(u: Sequence[int], v: Sequence[int]) -> bool:
    """Exact test whether the closed cylinder intervals of equal-length words meet."""
    if len(u) != len(v):
        raise DomainError("words must have equal length")
    # scaled by 2 * 3**(n-1): left endpoint 2*project_scaled, width 3
    a, b = 2 * project_scaled(u), 2 * project_scaled(v)
    return abs(a - b) <= 3


def interval_neighbor(w: Sequence[int]):
    """The unique other word of T_n whose cylinder interval meets that of ``w``.

    Returns ``None`` when no such word exists.
    """
    w = as_word(w)
    if not w or not is_admissible(w, "A"):
        raise DomainError(f"{format_word(w)} is not in T_n")
    last = w[-1]
    if last == 3:
        return None
    candidate = w[:-1] + ((1,) if last == 0 else (0,))
    return candidate if intervals_intersect(w, candidate) else None
