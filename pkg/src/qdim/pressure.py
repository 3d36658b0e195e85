"""Partition sums over canonical words, pressure functions and the root t0.

``Z_n(t) = sum over i in T_n of psi(i)**t`` is computed without enumerating
T_n. Reading a word left to right, psi factorizes into one weight per closed
unit: a 0 preceded by a run of j ones closes a good block and costs
``a_{j+1}``, a 3 preceded by j ones costs ``p1**j * p3``, and a pending run
of ones at the end costs ``p1**j`` (or ``max(p1**j, a_j)`` for psi-hat).
The state is therefore the length of the pending run plus whether the last
digit was 0 (which forbids a following 3), giving an O(n^2) recursion.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConsistencyError, DomainError, StandingAssumptionError
from .potential import Potential, ProbabilityVector

LOG3 = math.log(3.0)
DEFAULT_DEPTH = 400
HAUSDORFF_DEPTH = 48
DEFAULT_TOL = 1e-6
BISECTION_STEPS = 60
CSV_FIELDS = ("t", "p_t", "P_t", "rt_log3")


def as_potential(p) -> Potential:
    if isinstance(p, Potential):
        return p
    if isinstance(p, ProbabilityVector):
        return Potential(p)
    return Potential(ProbabilityVector(*p))


def log_partition_sums(p, t: float, nmax: int, hat: bool = False) -> np.ndarray:
    """``log Z_n(t)`` for n = 0..nmax (entry 0 is ``log 1 = 0``).

    Parameters
    ----------
    p : Potential, ProbabilityVector or sequence
    t : float
        Exponent, ``t >= 0``.
    nmax : int
        Largest word length.
    hat : bool
        Sum psi-hat**t instead of psi**t (requires p3 <= p1).
    """
    pot = as_potential(p)
    if t < 0:
        raise DomainError("t must be nonnegative")
    if nmax < 1:
        raise DomainError("nmax must be positive")
    if hat and not pot.p.standing_assumption:
        raise StandingAssumptionError("hat partition sums need p3 <= p1")
    _, p1, p3 = pot.p.as_tuple()
    log_p1, log_p3 = math.log(p1), math.log(p3)
    j = np.arange(nmax + 2, dtype=float)
    log_a = pot.log_a_values(nmax + 2)

    close0 = np.exp(t * log_a[1:])  # append 0 after j ones, j = 0..nmax+1
    close3 = np.exp(t * (j * log_p1 + log_p3))  # append 3 after j ones
    if hat:
        with np.errstate(invalid="ignore"):
            end = np.exp(t * np.maximum(j * log_p1, log_a[: nmax + 2]))
        end[0] = 1.0
    else:
        end = np.exp(t * j * log_p1)

    f = np.zeros(nmax + 2)  # pending run of j ones, last digit not 0
    f[0] = 1.0
    g = 0.0  # last digit is 0
    log_scale = 0.0
    out = np.zeros(nmax + 1)
    for n in range(1, nmax + 1):
        live = f[:n]  # at length n-1 the pending run is at most n-1
        new_g = float(live @ close0[:n]) + g * close0[0]
        new_f0 = float(live @ close3[:n])
        f[1 : n + 1] = live.copy()
        f[1] += g
        f[0] = new_f0
        g = new_g
        total = f[: n + 1].sum() + g
        f[: n + 1] /= total
        g /= total
        log_scale += math.log(total)
        out[n] = log_scale + math.log(float(f[: n + 1] @ end[: n + 1]) + g)
    return out


def partition_sum(p, t: float, n: int, hat: bool = False) -> float:
    """``log Z_n(t)``."""
    return float(log_partition_sums(p, t, n, hat)[n])


@dataclass(frozen=True)
class PressureEstimate:
    t: float
    depth: int
    value: float
    method: str
    residual: float


def _estimate(logz: np.ndarray, n: int, method: str) -> float:
    if method == "ratio":
        return float(logz[n] - logz[n - 1])
    if method == "slope":
        k = np.arange(n // 2, n + 1)
        return float(np.polyfit(k, logz[k], 1)[0])
    raise ValueError(f"unknown method {method!r}")


def pressure(p, t: float, depth: int = DEFAULT_DEPTH, hat: bool = False, method: str = "ratio") -> PressureEstimate:
    """Growth rate of ``Z_n(t)`` in nats per symbol, estimated at ``n = depth``."""
    if depth < 8:
        raise DomainError("pressure depth must be >= 8")
    logz = log_partition_sums(p, t, depth, hat)
    value = _estimate(logz, depth, method)
    coarse = _estimate(logz, depth // 2, method)
    return PressureEstimate(t=t, depth=depth, value=value, method=method, residual=abs(value - coarse))


def pressure_P(p, t: float, r: float, depth: int = DEFAULT_DEPTH) -> float:
    """``p(t) - r t log 3``."""
    return pressure(p, t, depth).value - r * t * LOG3


@dataclass(frozen=True)
class DimensionResult:
    """Root t0 of ``P`` and the induced quantization dimension."""

    r: float
    t0: float
    chi_r: float
    p_at_t0: float
    depth: int
    tolerance: float
    residual: float = 0.0
    diagnostics: dict = field(default_factory=dict)


def chi_from_t0(t0: float, r: float) -> float:
    if not 0 < t0 < 1 - 1e-9:
        raise DomainError(f"degenerate root t0={t0!r}; chi_r needs t0 in (0, 1)")
    return t0 * r / (1.0 - t0)


def chi_r(result: DimensionResult) -> float:
    return chi_from_t0(result.t0, result.r)


def solve_t0(p, r: float, depth: int = DEFAULT_DEPTH, tol: float = DEFAULT_TOL) -> DimensionResult:
    """Bisect ``P(t) = p(t) - r t log 3`` on [0, 1] for its sign change.

    Works for any positive p: the multiset of class potentials over T_n is
    the same as over U_n, so no branch swap is needed when p3 > p1.
    """
    if not r > 0:
        raise DomainError("r must be positive")
    if not tol > 0:
        raise DomainError("tol must be positive")
    pot = as_potential(p)

    def P(t):
        return pressure(pot, t, depth).value - r * t * LOG3

    lo, hi = 0.0, 1.0
    P_lo, P_hi = P(lo), P(hi)
    if not (P_lo > 0 > P_hi):
        raise ConsistencyError(f"no sign change of P on [0, 1]: P(0)={P_lo}, P(1)={P_hi}")
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if P(mid) > 0:
            lo = mid
        else:
            hi = mid
    t0 = 0.5 * (lo + hi)
    est = pressure(pot, t0, depth)
    delta = 10 * tol
    P_below = P(max(t0 - delta, 0.0))
    P_above = P(min(t0 + delta, 1.0))
    if not (P_below > 0 > P_above):
        raise ConsistencyError(f"sign pattern of P around t0={t0} violated")
    p_at_t0 = est.value
    if abs(p_at_t0 - r * t0 * LOG3) > tol:
        raise ConsistencyError("root does not satisfy p(t0) = r t0 log 3 within tol")
    return DimensionResult(
        r=r,
        t0=t0,
        chi_r=chi_from_t0(t0, r),
        p_at_t0=p_at_t0,
        depth=depth,
        tolerance=tol,
        residual=est.residual,
        diagnostics={
            "P_below": P_below,
            "P_above": P_above,
            "bracket": [lo, hi],
            "p_at_0": P_lo,
            "p_at_0_base3": P_lo / LOG3,
            "standing_assumption": pot.p.standing_assumption,
        },
    )


def hausdorff_dim(depth: int = HAUSDORFF_DEPTH) -> float:
    """Hausdorff dimension of the attractor, ``p(0) / log 3`` (independent of p)."""
    return pressure(ProbabilityVector.uniform(), 0.0, depth).value / LOG3


def pressure_curve(p, t_grid, r: float, depth: int = DEFAULT_DEPTH) -> list:
    """Rows ``(t, p(t), P(t), r t log 3)`` over ``t_grid``."""
    pot = as_potential(p)
    rows = []
    for t in t_grid:
        t = float(t)
        if not 0 <= t <= 1.5:
            raise DomainError(f"grid value {t} outside [0, 1.5]")
        pt = pressure(pot, t, depth).value
        rows.append((t, pt, pt - r * t * LOG3, r * t * LOG3))
    return rows


def curve_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for row in rows:
        w.writerow([f"{v:.17g}" for v in row])
    return buf.getvalue()


def curve_from_csv(text: str) -> list:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if tuple(header) != CSV_FIELDS:
        raise ValueError(f"unexpected header {header!r}")
    return [tuple(float(v) for v in row) for row in reader]
