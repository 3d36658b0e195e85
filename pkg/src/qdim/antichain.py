"""First-passage antichains of the hat potential and their full-shift lifts.

For fixed ``r`` and the root ``t0`` of the pressure function the potential
``phi_hat(i) = (psi_hat(i) 3^(-|i| r))**t0`` decreases strictly along every
branch of the canonical prefix tree. ``gamma_hat(eps)`` collects the words
where it first drops below ``eps``; since the descent is monotone this is a
finite maximal antichain of the canonical shift. Adding the 0-siblings of
members ending in 1 gives ``gamma_E``, and substituting every member by its
whole canonicalization fiber (then pruning prefix-comparable words) gives an
antichain of the unconstrained shift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import symbolic
from .exceptions import DomainError, SizeLimitError
from .potential import Potential, expand_fiber
from .pressure import LOG3, as_potential

DEFAULT_CAP = 10**7
KINDS = ("gamma_hat", "gamma_minus", "theta", "gamma_E", "gamma_sigma_tilde")
_ANTICHAIN_KINDS = ("gamma_hat", "gamma_sigma_tilde")


def epsilon_zero(p, r: float, t0: float) -> float:
    """Smallest single-letter value ``min_d (p_d 3^-r)**t0``."""
    if not 0 < t0 < 1:
        raise DomainError("t0 must lie in (0, 1)")
    pv = as_potential(p).p
    return min((q * 3.0**-r) ** t0 for q in pv.as_tuple())


@dataclass(frozen=True)
class Antichain:
    """A sorted, duplicate-free list of words together with how it was made."""

    epsilon: float
    r: float
    t0: float
    members: tuple
    kind: str
    potential: Potential = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown antichain kind {self.kind!r}")

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, w):
        return tuple(w) in self.member_set

    @property
    def member_set(self) -> frozenset:
        cached = self.__dict__.get("_set")
        if cached is None:
            cached = frozenset(self.members)
            object.__setattr__(self, "_set", cached)
        return cached

    @property
    def lengths(self) -> np.ndarray:
        return np.fromiter((len(w) for w in self.members), dtype=np.int64, count=len(self.members))

    def is_prefix_free(self) -> bool:
        """No member is a proper prefix of another."""
        s = self.member_set
        return not any(w[:k] in s for w in self.members for k in range(1, len(w)))

    def prefix_hits(self, stream) -> int:
        """Number of members that are prefixes of ``stream``."""
        s = self.member_set
        return sum(tuple(stream[:k]) in s for k in range(1, len(stream) + 1))


# ----------------------------------------------------------------------------
# vectorized hat potential


def phi_hat_log(p, words, r: float, t0: float) -> np.ndarray:
    """``log phi_hat`` of canonical words, evaluated column by column.

    Words that are not canonical are canonicalized first (the class of a
    word and of its canonical representative coincide).
    """
    pot = as_potential(p)
    pot._require_standing()
    words = [symbolic.canonicalize(w) if not symbolic.is_admissible(w, "A") else tuple(w) for w in words]
    if not words:
        return np.zeros(0)
    n = len(words)
    L = max(len(w) for w in words)
    mat = np.full((n, L), -1, dtype=np.int8)
    for k, w in enumerate(words):
        mat[k, : len(w)] = w
    return _hat_from_matrix(pot, mat, r, t0)


def _log_end(pot: Potential, jmax: int) -> np.ndarray:
    _, p1, _ = pot.p.as_tuple()
    j = np.arange(jmax + 1, dtype=float)
    out = np.maximum(j * math.log(p1), pot.log_a_values(jmax))
    out[0] = 0.0
    return out


def _hat_from_matrix(pot: Potential, mat: np.ndarray, r, t0) -> np.ndarray:
    _, p1, p3 = pot.p.as_tuple()
    n, L = mat.shape
    log_a = pot.log_a_values(L + 1)
    log_end = _log_end(pot, L)
    log_c = np.zeros(n)
    run = np.zeros(n, dtype=np.int64)
    length = np.zeros(n, dtype=np.int64)
    for col in range(L):
        d = mat[:, col]
        m0, m1, m3 = d == 0, d == 1, d == 3
        log_c[m0] += log_a[run[m0] + 1]
        log_c[m3] += run[m3] * math.log(p1) + math.log(p3)
        run[m1] += 1
        run[m0 | m3] = 0
        length += d >= 0
    return t0 * (log_c + log_end[run] - length * r * LOG3)


# ----------------------------------------------------------------------------
# construction


def _depth_bound(eps: float, r: float, t0: float) -> int:
    # psi_hat <= 1, so phi_hat(i) <= 3^(-|i| r t0)
    return int(math.ceil(math.log(1.0 / eps) / (r * t0 * LOG3))) + 1


def build_gamma_hat(p, epsilon: float, r: float, t0: float, cap: int = DEFAULT_CAP) -> Antichain:
    """First-passage antichain of ``phi_hat`` below ``epsilon``.

    The canonical prefix tree is explored one generation at a time; each
    word carries the product of its closed blocks, the length of its pending
    run of 1s and whether it ends in 0, so a child's potential costs O(1).

    Raises
    ------
    DomainError
        If ``epsilon`` is not in ``(0, epsilon_zero)``.
    SizeLimitError
        If more than ``cap`` words would be stored.
    """
    pot = as_potential(p)
    pot._require_standing()
    eps0 = epsilon_zero(pot, r, t0)
    if not 0 < epsilon < eps0:
        raise DomainError(
            f"epsilon={epsilon!r} must lie in (0, eps0={eps0!r}) so that no single letter is a member"
        )
    _, p1, p3 = pot.p.as_tuple()
    log_p1, log_p3 = math.log(p1), math.log(p3)
    log_eps = math.log(epsilon)
    L = _depth_bound(epsilon, r, t0)
    log_a = pot.log_a_values(L + 2)
    log_end = _log_end(pot, L + 1)

    digits = np.array([[0], [1], [3]], dtype=np.int8)
    log_c = np.array([log_a[1], 0.0, log_p3])
    run = np.array([0, 1, 0], dtype=np.int64)
    last0 = np.array([True, False, False])

    harvested = []
    stored = 0
    n = 1
    while digits.shape[0]:
        value = t0 * (log_c + log_end[run] - n * r * LOG3)
        low = value < log_eps
        if n == 1 and low.any():  # cannot happen for eps < eps0
            raise AssertionError("single letter below epsilon")
        if low.any():
            harvested.append(digits[low])
            stored += int(low.sum())
        keep = ~low
        digits, log_c, run, last0 = digits[keep], log_c[keep], run[keep], last0[keep]
        if not digits.shape[0]:
            break
        if stored + 3 * digits.shape[0] > cap:
            raise SizeLimitError(f"antichain for epsilon={epsilon!r} exceeds the cap of {cap} words", cap=cap)
        if n > L:
            raise AssertionError("descent exceeded the a-priori depth bound")
        parts = []
        for d in symbolic.ALPHABET:
            sel = ~last0 if d == 3 else np.ones(digits.shape[0], bool)
            D, C, R = digits[sel], log_c[sel], run[sel]
            col = np.full((D.shape[0], 1), d, dtype=np.int8)
            if d == 1:
                parts.append((np.hstack([D, col]), C, R + 1, np.zeros(D.shape[0], bool)))
            elif d == 0:
                parts.append((np.hstack([D, col]), C + log_a[R + 1], np.zeros_like(R), np.ones(D.shape[0], bool)))
            else:
                parts.append((np.hstack([D, col]), C + R * log_p1 + log_p3, np.zeros_like(R), np.zeros(D.shape[0], bool)))
        digits, log_c, run, last0 = (np.concatenate(x) for x in zip(*parts))
        n += 1

    members = sorted(tuple(int(d) for d in row) for block in harvested for row in block)
    return Antichain(epsilon, r, t0, tuple(members), "gamma_hat", pot)


def _require_kind(a: Antichain, kind: str):
    if a.kind != kind:
        raise DomainError(f"expected an antichain of kind {kind!r}, got {a.kind!r}")


def parents(g: Antichain, unique: bool = True) -> list:
    """``i^-`` for every member; as a sorted set, or the multiset in member order."""
    out = [w[:-1] for w in g.members]
    return sorted(set(out)) if unique else out


def gamma_minus(g: Antichain) -> Antichain:
    """The deduplicated parent set of a ``gamma_hat`` antichain."""
    _require_kind(g, "gamma_hat")
    return Antichain(g.epsilon, g.r, g.t0, tuple(parents(g)), "gamma_minus", g.potential)


def theta(g: Antichain) -> Antichain:
    """``{i^- 0 : i in gamma_hat, i ends in 1}``."""
    _require_kind(g, "gamma_hat")
    words = sorted({w[:-1] + (0,) for w in g.members if w[-1] == 1})
    return Antichain(g.epsilon, g.r, g.t0, tuple(words), "theta", g.potential)


def extend_to_E(g: Antichain) -> Antichain:
    """``gamma_hat`` united with its theta set."""
    _require_kind(g, "gamma_hat")
    words = sorted(set(g.members) | set(theta(g).members))
    return Antichain(g.epsilon, g.r, g.t0, tuple(words), "gamma_E", g.potential)


def project_to_full_shift(gE: Antichain, cap: int = DEFAULT_CAP, prune: bool = True) -> Antichain:
    """Replace each member by its canonicalization fiber and drop words with a proper prefix in the set.

    ``prune=False`` returns the unpruned union (still tagged
    ``gamma_sigma_tilde``; used to check covering before pruning).
    """
    _require_kind(gE, "gamma_E")
    words = set()
    for w in gE.members:
        words.update(expand_fiber(w))
        if len(words) > cap:
            raise SizeLimitError(f"fiber expansion exceeds the cap of {cap} words", cap=cap)
    if prune:
        words = {w for w in words if not any(w[:k] in words for k in range(1, len(w)))}
    return Antichain(gE.epsilon, gE.r, gE.t0, tuple(sorted(words)), "gamma_sigma_tilde", gE.potential)


# ----------------------------------------------------------------------------
# statistics and structural checks


@dataclass(frozen=True)
class AntichainStats:
    epsilon: float
    kind: str
    count: int
    min_len: int
    max_len: int
    sum_phi_hat: float
    max_phi_hat: float
    sum_phi_hat_parents: float
    parent_count: int
    ratio: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def antichain_stats(a: Antichain, r: float | None = None, t0: float | None = None, p=None) -> AntichainStats:
    """Counts, length range and hat-potential sums of an antichain.

    ``sum_phi_hat_parents`` sums over the parent multiset (one term per
    member); ``parent_count`` counts distinct parents.
    """
    r = a.r if r is None else r
    t0 = a.t0 if t0 is None else t0
    pot = as_potential(p if p is not None else a.potential)
    if not a.members:
        raise DomainError("empty antichain")
    vals = np.exp(phi_hat_log(pot, a.members, r, t0))
    par = [w[:-1] for w in a.members]
    par_vals = np.array([1.0 if not w else 0.0 for w in par])
    nonempty = [k for k, w in enumerate(par) if w]
    if nonempty:
        par_vals[nonempty] = np.exp(phi_hat_log(pot, [par[k] for k in nonempty], r, t0))
    s, sp = math.fsum(vals), math.fsum(par_vals)
    lens = a.lengths
    return AntichainStats(
        epsilon=a.epsilon,
        kind=a.kind,
        count=len(a),
        min_len=int(lens.min()),
        max_len=int(lens.max()),
        sum_phi_hat=s,
        max_phi_hat=float(vals.max()),
        sum_phi_hat_parents=sp,
        parent_count=len(set(par)),
        ratio=s / sp,
    )


def random_streams(count: int, length: int, branch: str = "A", seed=None) -> np.ndarray:
    """Digit streams drawn uniformly among admissible next digits of ``branch``."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    alphabet = np.array(symbolic.ALPHABET, dtype=np.int8)
    if branch == "full":
        return alphabet[rng.integers(0, 3, size=(count, length))]
    if branch != "A":
        raise DomainError("streams are drawn from branch 'A' or 'full'")
    out = np.empty((count, length), dtype=np.int8)
    out[:, 0] = alphabet[rng.integers(0, 3, size=count)]
    for k in range(1, length):
        u = rng.integers(0, 3, size=count)
        after0 = rng.integers(0, 2, size=count)  # only 0 or 1 may follow a 0
        out[:, k] = np.where(out[:, k - 1] == 0, alphabet[after0], alphabet[u])
    return out


def prefix_hit_counts(a: Antichain, streams: np.ndarray) -> np.ndarray:
    """For each stream, the number of members that are a prefix of it."""
    s = a.member_set
    L = streams.shape[1]
    if a.members and int(a.lengths.max()) > L:
        raise DomainError(f"streams of length {L} are shorter than the longest member")
    rows = [tuple(int(d) for d in row) for row in streams]
    return np.array([sum(row[:k] in s for k in range(1, L + 1)) for row in rows], dtype=np.int64)


def is_maximal(a: Antichain, count: int = 10_000, length: int = 40, seed=0) -> bool:
    """Sampled check that every infinite word has exactly one prefix in ``a``."""
    branch = "full" if a.kind == "gamma_sigma_tilde" else "A"
    hits = prefix_hit_counts(a, random_streams(count, length, branch, seed))
    return bool(np.all(hits == 1))
