"""Finite-depth discretizations and samplers of the self-similar measure.

At depth n the measure is the mixture over canonical words i in T_n of
``psi(i)`` times the image of the measure under S_i. Collapsing every image
to one point of its cylinder interval gives an atomic measure with one atom
per canonical word, within (9/2) 3^-n of the true measure in the
Wasserstein-infinity sense.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError
from .pressure import as_potential
from .symbolic import ALPHABET, HULL_WIDTH, project

MAX_DEPTH = 16


@dataclass(frozen=True)
class DiscreteMeasure:
    """Atoms in increasing order with positive weights.

    ``keys`` holds the exact integer positions ``3**(depth-1) * left_endpoint``
    when the measure came from :func:`discretize`; it is what merging and
    comparison use, never float equality.
    """

    atoms: np.ndarray
    weights: np.ndarray
    depth: int | None = None
    placement: str = "left"
    keys: np.ndarray | None = None

    def __post_init__(self):
        atoms = np.asarray(self.atoms, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if atoms.ndim != 1 or atoms.shape != weights.shape or atoms.size == 0:
            raise DomainError("atoms and weights must be matching nonempty 1-d arrays")
        if np.any(np.diff(atoms) <= 0):
            raise DomainError("atoms must be strictly increasing")
        if np.any(weights <= 0):
            raise DomainError("weights must be positive")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def from_points(cls, points, weights=None, normalize: bool = True):
        """Sort and merge arbitrary points into a measure (equal points are combined)."""
        points = np.asarray(points, dtype=float).ravel()
        weights = np.ones_like(points) if weights is None else np.asarray(weights, float).ravel()
        atoms, inverse = np.unique(points, return_inverse=True)
        merged = np.zeros_like(atoms)
        np.add.at(merged, inverse, weights)
        keep = merged > 0
        atoms, merged = atoms[keep], merged[keep]
        if normalize:
            merged = merged / merged.sum()
        return cls(atoms, merged)

    def __len__(self):
        return self.atoms.size

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    def moment(self, k: int) -> float:
        return float(self.weights @ self.atoms**k)

    def mean(self) -> float:
        return self.moment(1) / self.total_mass

    def variance(self) -> float:
        m = self.mean()
        return float(self.weights @ (self.atoms - m) ** 2) / self.total_mass

    def cdf(self, x) -> np.ndarray:
        cum = np.cumsum(self.weights)
        idx = np.searchsorted(self.atoms, np.asarray(x, float), side="right")
        return np.where(idx > 0, cum[np.maximum(idx - 1, 0)], 0.0)

    def pushforward(self, digit_word) -> "DiscreteMeasure":
        """Image under the composed map S_w, i.e. ``x -> project(w) + 3**-|w| x``."""
        scale = 3.0 ** (-len(digit_word))
        return DiscreteMeasure(project(digit_word) + scale * self.atoms, self.weights)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("atom", "weight"))
        for a, m in zip(self.atoms, self.weights):
            w.writerow((f"{a:.17g}", f"{m:.17g}"))
        return buf.getvalue()


def _canonical_atoms(pot, depth: int):
    """Exact integer positions and class potentials of all words in T_depth."""
    p0, p1, p3 = pot.p.as_tuple()
    a = np.array([0.0] + [pot.a_value(w) for w in range(1, depth + 2)])
    pos = np.zeros(1, dtype=np.int64)
    closed = np.ones(1)
    run = np.zeros(1, dtype=np.int64)
    last0 = np.zeros(1, dtype=bool)
    for _ in range(depth):
        parts = []
        for d in ALPHABET:
            sel = ~last0 if d == 3 else slice(None)
            P, C, R = pos[sel], closed[sel], run[sel]
            if d == 1:
                parts.append((3 * P + 1, C, R + 1, np.zeros(P.size, bool)))
            elif d == 0:
                parts.append((3 * P, C * a[R + 1], np.zeros_like(R), np.ones(P.size, bool)))
            else:
                parts.append((3 * P + 3, C * p1**R * p3, np.zeros_like(R), np.zeros(P.size, bool)))
        pos, closed, run, last0 = (np.concatenate(x) for x in zip(*parts))
    weights = closed * p1**run
    order = np.argsort(pos, kind="stable")
    return pos[order], weights[order]


def discretize(p, depth: int, placement: str = "midpoint") -> DiscreteMeasure:
    """One atom per canonical word of length ``depth``, weighted by its class potential.

    ``placement`` puts each atom at the left endpoint or the midpoint of its
    cylinder interval.
    """
    if not 1 <= depth <= MAX_DEPTH:
        raise DomainError(f"depth must be in [1, {MAX_DEPTH}]")
    if placement not in ("left", "midpoint"):
        raise DomainError(f"unknown placement {placement!r}")
    pot = as_potential(p)
    keys, weights = _canonical_atoms(pot, depth)
    atoms = keys / 3.0 ** (depth - 1)
    if placement == "midpoint":
        atoms = atoms + 0.5 * HULL_WIDTH * 3.0**-depth
    return DiscreteMeasure(atoms, weights, depth=depth, placement=placement, keys=keys)


def sample(p, count: int, depth: int = 40, seed=None) -> np.ndarray:
    """Draw ``count`` points by projecting i.i.d. digit strings of length ``depth``."""
    if count < 1:
        raise DomainError("count must be positive")
    pot = as_potential(p)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    digits = rng.choice(np.array(ALPHABET, dtype=float), size=(count, depth), p=pot.p.as_tuple())
    return digits @ (3.0 ** -np.arange(depth))


@dataclass(frozen=True)
class SelfSimilarityReport:
    depth: int
    atoms_match: bool
    max_weight_discrepancy: float

    def passed(self, tol: float = 1e-12) -> bool:
        return self.atoms_match and self.max_weight_discrepancy <= tol


def self_similarity_check(p, depth: int, fine: DiscreteMeasure | None = None) -> SelfSimilarityReport:
    """Compare the depth+1 discretization with the p-mixture of the three images of depth ``depth``.

    ``fine`` replaces the depth+1 discretization (used to inject faults).
    """
    if not 1 <= depth <= MAX_DEPTH - 1:
        raise DomainError(f"depth must be in [1, {MAX_DEPTH - 1}]")
    pot = as_potential(p)
    coarse = discretize(pot, depth, placement="left")
    if fine is None:
        fine = discretize(pot, depth + 1, placement="left")
    keys = np.concatenate([d * 3**depth + coarse.keys for d in ALPHABET])
    mass = np.concatenate([pot.p[d] * coarse.weights for d in ALPHABET])
    merged_keys, inverse = np.unique(keys, return_inverse=True)
    merged = np.zeros(merged_keys.size)
    np.add.at(merged, inverse, mass)
    if fine.keys is None or fine.keys.size != merged_keys.size or np.any(fine.keys != merged_keys):
        return SelfSimilarityReport(depth, False, float("inf"))
    return SelfSimilarityReport(depth, True, float(np.max(np.abs(fine.weights - merged))))
