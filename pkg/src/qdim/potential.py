"""Class potentials of canonical words.

For a canonical word ``i`` (no factor (0, 3)) the class potential
``psi(i)`` is the total product-measure mass of all words of the same
length whose composed map equals the map of ``i``. That class is the fiber
of :func:`qdim.symbolic.canonicalize`, and its mass factorizes over good
blocks: a maximal block (1^(w-1), 0) carries the mass ``a_w`` of its whole
fiber and every other position carries its own letter probability.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import symbolic
from .exceptions import DomainError, SizeLimitError, StandingAssumptionError

SUM_TOL = 1e-12


@dataclass(frozen=True)
class ProbabilityVector:
    """Strictly positive weights (p0, p1, p3) of the digits 0, 1, 3."""

    p0: float
    p1: float
    p3: float

    def __post_init__(self):
        for name in ("p0", "p1", "p3"):
            v = float(getattr(self, name))
            if not v > 0 or not math.isfinite(v):
                raise DomainError(f"{name} must be strictly positive, got {v!r}")
            object.__setattr__(self, name, v)
        total = self.p0 + self.p1 + self.p3
        if abs(total - 1.0) > SUM_TOL:
            raise DomainError(f"probabilities must sum to 1, got {total!r}")

    @classmethod
    def from_sequence(cls, values: Sequence[float], normalize_tol: float = 0.0):
        """Build from three numbers, rescaling if the sum is within ``normalize_tol`` of 1."""
        vals = [float(v) for v in values]
        if len(vals) != 3:
            raise DomainError(f"expected three probabilities, got {len(vals)}")
        total = sum(vals)
        if normalize_tol and abs(total - 1.0) < normalize_tol:
            vals = [v / total for v in vals]
        return cls(*vals)

    @classmethod
    def uniform(cls):
        return cls(1 / 3, 1 / 3, 1 / 3)

    def __getitem__(self, digit: int) -> float:
        if digit == 0:
            return self.p0
        if digit == 1:
            return self.p1
        if digit == 3:
            return self.p3
        raise DomainError(f"digit {digit!r} is not in the alphabet")

    def as_tuple(self) -> tuple:
        return (self.p0, self.p1, self.p3)

    @property
    def standing_assumption(self) -> bool:
        """True when p3 <= p1, the regime where the hat potential is defined."""
        return self.p3 <= self.p1

    def word_mass(self, w: Sequence[int]) -> float:
        return math.prod(self[d] for d in w)


def xi(w: Sequence[int]) -> int:
    """Length of ``w`` with its trailing run of 1s removed."""
    k = len(w)
    while k > 0 and w[k - 1] == 1:
        k -= 1
    return k


class Potential:
    """Evaluator of psi, psi-hat and the block masses ``a_w`` for a fixed p.

    Parameters
    ----------
    p : ProbabilityVector
    cap : int
        Largest word length for which fibers are enumerated explicitly.
    """

    def __init__(self, p: ProbabilityVector, cap: int = symbolic.ENUMERATION_CAP):
        if not isinstance(p, ProbabilityVector):
            p = ProbabilityVector(*p)
        self.p = p
        self.cap = cap
        self._a = [None, p.p0]

    def __repr__(self):
        return f"Potential(p={self.p.as_tuple()!r})"

    # block masses -----------------------------------------------------

    def a_value(self, w: int) -> float:
        """Mass of the fiber of (1^(w-1), 0): ``p0 * sum_l p1^(w-1-l) p3^l``."""
        if w < 1:
            raise DomainError("block length must be >= 1")
        a = self._a
        while len(a) <= w:
            # s_w = p1 s_{w-1} + p3^(w-1), with a_w = p0 s_w
            k = len(a)
            a.append(self.p.p1 * a[k - 1] + self.p.p0 * self.p.p3 ** (k - 1))
        return a[w]

    def log_a_values(self, wmax: int) -> np.ndarray:
        """``log a_w`` for w = 0..wmax (entry 0 is unused), safe against underflow."""
        p0, p1, p3 = self.p.as_tuple()
        hi, lo = max(p1, p3), min(p1, p3)
        ratio = lo / hi
        w = np.arange(wmax + 1, dtype=float)
        if ratio == 1.0:
            geo = w.copy()
        else:
            geo = -np.expm1(w * math.log(ratio)) / (1.0 - ratio)
        with np.errstate(divide="ignore"):
            out = math.log(p0) + (w - 1) * math.log(hi) + np.log(geo)
        out[0] = -np.inf
        return out

    @property
    def q0(self) -> float:
        """Smallest q with a_q > p1^q; ``math.inf`` when no such q exists."""
        p = self._require_standing()
        if not p.p1 - p.p3 < p.p0:
            return math.inf
        q = 1
        while not self.a_value(q) > p.p1**q:
            q += 1
        return q

    def in_threshold_set(self, q: int) -> bool:
        """Membership of ``q`` in {q >= 1 : sum_{l<q} (p3/p1)^l > p1/p0}."""
        return q >= 1 and self.a_value(q) > self.p.p1**q

    # class potential --------------------------------------------------

    def psi(self, i: Sequence[int]) -> float:
        """Closed-form class potential of a canonical word (``psi(()) == 1``)."""
        i = symbolic.as_word(i)
        if not symbolic.is_admissible(i, "A"):
            raise DomainError(
                f"{symbolic.format_word(i)} contains (0, 3); canonicalize it first"
            )
        p = self.p
        value = 1.0
        run = 0
        for d in i:
            if d == 1:
                run += 1
            elif d == 0:
                value *= self.a_value(run + 1)
                run = 0
            else:
                value *= p.p1**run * p.p3
                run = 0
        return value * p.p1**run

    def psi_by_enumeration(self, i: Sequence[int]) -> float:
        """psi as the literal sum of word masses over the fiber of ``i``."""
        return math.fsum(self.p.word_mass(eta) for eta in self.enumerate_class(i))

    def class_size(self, i: Sequence[int]) -> int:
        return math.prod(l - k + 1 for k, l in symbolic.decompose_blocks(i).good)

    def enumerate_class(self, i: Sequence[int]) -> list:
        """All words of length |i| that canonicalize to ``i``, sorted."""
        i = symbolic.as_word(i)
        if not symbolic.is_admissible(i, "A"):
            raise DomainError(f"{symbolic.format_word(i)} is not canonical")
        if len(i) > self.cap:
            raise SizeLimitError(
                f"class enumeration length {len(i)} exceeds the cap of {self.cap}",
                cap=self.cap,
            )
        return expand_fiber(i)

    # hat potential ----------------------------------------------------

    def _require_standing(self) -> ProbabilityVector:
        if not self.p.standing_assumption:
            raise StandingAssumptionError(
                "hat potential needs p3 <= p1; the pressure pipeline "
                "(qdim.pressure.solve_t0) works for any p"
            )
        return self.p

    def star(self, i: Sequence[int]) -> tuple:
        """``i`` with its last digit replaced by 0 when that raises psi, else ``i``."""
        self._require_standing()
        i = symbolic.as_word(i)
        run = len(i) - xi(i)
        if run >= 1 and self.in_threshold_set(run):
            return i[:-1] + (0,)
        return i

    def psi_hat(self, i: Sequence[int], method: str = "max") -> float:
        """``max(psi(i), psi(i^- 0))`` when ``i`` ends in 1, else ``psi(i)``.

        ``method="star"`` evaluates the same quantity as ``psi(star(i))``.
        """
        self._require_standing()
        i = symbolic.as_word(i)
        if not i:
            return 1.0
        if method == "star":
            return self.psi(self.star(i))
        if method != "max":
            raise ValueError(f"unknown method {method!r}")
        value = self.psi(i)
        if i[-1] == 1:
            value = max(value, self.psi(i[:-1] + (0,)))
        return value

    def phi_t(self, i: Sequence[int], t: float, r: float, hat: bool = False) -> float:
        """``(psi(i) * 3**(-|i| r))**t``, with psi-hat in place of psi if ``hat``."""
        base = self.psi_hat(i) if hat else self.psi(i)
        return (base * 3.0 ** (-len(i) * r)) ** t


def expand_fiber(i: Sequence[int]) -> list:
    """Substitute each maximal good block (1^(L-1), 0) by every (1^j, 0, 3^(L-1-j))."""
    blocks = symbolic.decompose_blocks(i).good
    options = []
    for k, l in blocks:
        L = l - k + 1
        options.append([(1,) * j + (0,) + (3,) * (L - 1 - j) for j in range(L)])
    out = []
    base = list(i)
    for combo in itertools.product(*options):
        w = base[:]
        for (k, l), seg in zip(blocks, combo):
            w[k - 1 : l] = seg
        out.append(tuple(w))
    out.sort()
    return out


#: The evaluator doubles as the context object passed between modules.
PotentialContext = Potential
