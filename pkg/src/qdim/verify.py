"""Cross-module invariant suite.

Each check returns a :class:`CheckResult`; :func:`run_suite` runs them in a
fixed order. The ``"full"`` level uses the sizes the library is accepted at,
``"quick"`` shrinks the expensive ones for interactive use.
"""

from __future__ import annotations

import functools
import itertools
import math
import time
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from . import antichain as ac
from . import symbolic as sy
from .measure import DiscreteMeasure, discretize
from .potential import Potential, ProbabilityVector, xi
from .pressure import LOG3, hausdorff_dim, log_partition_sums, pressure, solve_t0
from .quantizer import (
    estimate_dimension,
    optimal_quantizer,
    scaling_diagnostics,
    splitting_checks,
)

CANONICAL_P = (0.4, 0.35, 0.25)
UNIFORM_P = (1 / 3, 1 / 3, 1 / 3)
HAUSDORFF_VALUE = 0.876036
EMPIRICAL_GRID = (16, 32, 64, 128, 256, 512)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self, timings: bool = True) -> str:
        """One report line; ``timings=False`` drops wall-clock values so reruns are byte-identical."""
        status = "PASS" if self.passed else "FAIL"
        items = [(k, v) for k, v in self.detail.items() if timings or k != "seconds"]
        extras = ", ".join(f"{k}={_fmt(v)}" for k, v in items)
        head = f"{status} {self.name}" + (f" ({self.seconds:.2f}s)" if timings else "")
        return head + (": " + extras if extras else "")


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def _timed(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        start = time.perf_counter()
        res = fn(*args, **kwargs)
        res.seconds = time.perf_counter() - start
        if "time_limit" in res.detail:
            limit = res.detail["time_limit"]
            res.detail["seconds"] = res.seconds
            res.passed = res.passed and res.seconds < limit
        return res

    return wrapper


# ----------------------------------------------------------------------------
# symbolic and potential level


@_timed
def check_hausdorff(depth: int = 48, tol: float = 1e-4) -> CheckResult:
    value = hausdorff_dim(depth)
    return CheckResult(
        "hausdorff-dimension",
        abs(value - HAUSDORFF_VALUE) <= tol,
        {"value": value, "expected": HAUSDORFF_VALUE, "time_limit": 1.0},
    )


@_timed
def check_partition_of_unity(nmax: int = 2000, tol: float = 1e-10, ps=(CANONICAL_P, UNIFORM_P, (0.2, 0.6, 0.2))) -> CheckResult:
    worst, worst_p1 = 0.0, 0.0
    for p in ps:
        logz = log_partition_sums(p, 1.0, nmax)
        worst = max(worst, float(np.max(np.abs(np.expm1(logz[1:])))))
        worst_p1 = max(worst_p1, abs(pressure(p, 1.0, nmax).value))
    return CheckResult(
        "partition-of-unity",
        worst <= tol and worst_p1 <= tol,
        {"max_abs_Z_minus_1": worst, "max_abs_p1": worst_p1, "time_limit": 5.0},
    )


@_timed
def check_oracle_equivalence(nmax: int = 8, tol: float = 1e-12, p=CANONICAL_P) -> CheckResult:
    pot = Potential(ProbabilityVector(*p))
    worst = 0.0
    fibers_ok = True
    for n in range(1, nmax + 1):
        groups = defaultdict(list)
        for w in sy.enumerate_words(n, "full"):
            groups[sy.canonicalize(w)].append(w)
        canon = sy.enumerate_words(n, "A")
        fibers_ok &= sorted(groups) == canon
        fibers_ok &= sum(len(v) for v in groups.values()) == 3**n
        for i in canon:
            fibers_ok &= sorted(groups[i]) == pot.enumerate_class(i)
            direct = math.fsum(pot.p.word_mass(w) for w in groups[i])
            worst = max(worst, abs(pot.psi(i) - direct) / direct)
    overlap_ok = all(_full_overlap_pairs(n) == {sy.full_overlap_pair(n)} for n in range(2, nmax + 1))
    return CheckResult(
        "psi-oracle-equivalence",
        worst <= tol and fibers_ok and overlap_ok,
        {"max_rel_err": worst, "fibers_partition": fibers_ok, "overlap_pairs_unique": overlap_ok, "time_limit": 10.0},
    )


def _full_overlap_pairs(n: int) -> set:
    """Pairs (u, v), u_1 > v_1, with equal projection and no equal projection of shorter prefixes."""
    by_point = defaultdict(list)
    for w in sy.enumerate_words(n, "full"):
        by_point[sy.project_scaled(w)].append(w)
    out = set()
    for words in by_point.values():
        for u, v in itertools.combinations(words, 2):
            if u[0] == v[0]:
                continue
            if any(sy.project_scaled(u[:k]) == sy.project_scaled(v[:k]) for k in range(1, n)):
                continue
            out.add((u, v) if u[0] > v[0] else (v, u))
    return out


def _hat_sum_by_enumeration(pot: Potential, n: int, t: float, hat: bool) -> float:
    total = []
    for i in sy.enumerate_words(n, "A"):
        v = pot.psi_by_enumeration(i)
        if hat and i[-1] == 1:
            v = max(v, pot.psi_by_enumeration(i[:-1] + (0,)))
        total.append(v**t)
    return math.fsum(total)


@_timed
def check_dp_equivalence(nmax: int = 8, ts=(0.0, 0.3, 0.7, 1.0, 1.4), tol: float = 1e-10, p=CANONICAL_P) -> CheckResult:
    pot = Potential(ProbabilityVector(*p))
    worst = 0.0
    for hat in (False, True):
        for t in ts:
            logz = log_partition_sums(pot, t, nmax, hat)
            for n in range(1, nmax + 1):
                direct = _hat_sum_by_enumeration(pot, n, t, hat)
                worst = max(worst, abs(math.exp(logz[n]) - direct) / direct)
    return CheckResult("partition-sum-dp", worst <= tol, {"max_rel_err": worst})


def _inequalities(p, nmax: int, half: int, corrected: bool = False) -> dict:
    """Failure counts per inequality.

    ``corrected`` replaces the constant p0 of ``psi(i0) >= p0 psi_hat(i)`` by
    ``min(p0, p1)`` (and p0 p1 by ``min(p0, p1) p1`` in the product bound):
    when p0 > p1 and i ends in a long run of 1s, ``a_{j+1} = p1 a_j + p0 p3^j``
    falls below ``p0 a_j``, so the constant p0 is not valid in general.
    It also raises C3 = p0/p1 to ``max(1, p0/p1)``: when psi_hat = psi the
    bound needs ``C3 (n - xi) >= 1``, which fails for p0 < p1 at n - xi = 1.
    """
    pot = Potential(ProbabilityVector(*p))
    p0, p1, p3 = pot.p.as_tuple()
    c_zero = min(p0, p1) if corrected else p0
    slack = 1 + 1e-12
    words = {n: sy.enumerate_words(n, "A") for n in range(1, nmax + 1)}
    fails = defaultdict(int)
    c3 = max(1.0, p0 / p1) if corrected else p0 / p1
    for n in range(1, nmax + 1):
        for i in words[n]:
            psi, hat = pot.psi(i), pot.psi_hat(i)
            k = xi(i)
            if hat < psi / slack:
                fails["hat_ge_psi"] += 1
            if k <= n - 1 and hat > c3 * (n - k) * psi * slack:
                fails["C3_bound"] += 1
            for z in sy.decompose_blocks(i)["D_Good"]:
                lhs = pot.psi(i[:z]) * pot.psi(i[z:])
                if abs(lhs - psi) > 1e-12 * psi:
                    fails["multiplicativity"] += 1
            if n < nmax:
                if pot.psi(i + (0,)) < c_zero * hat / slack:
                    fails["append_zero"] += 1
                if pot.psi_hat((1,) + i) < p1 * hat / slack:
                    fails["prepend_one"] += 1
    short = [()] + [w for n in range(1, half + 1) for w in words[n]]
    hats = {w: pot.psi_hat(w) for w in short}
    for i in short:
        for j in short:
            if pot.psi_hat(i + (0, 1) + j) < c_zero * p1 * hats[i] * hats[j] / slack:
                fails["C11_bound"] += 1
    c6 = 2 * p1 / p0 if p3 == p1 else (p1 / p0) / (1 - p3 / p1)
    for u in range(1, 41):
        for v in range(1, 41):
            if pot.a_value(u + v) > c6 * pot.a_value(u) * pot.a_value(v) * slack:
                fails["C6_bound"] += 1
    return dict(fails)


@_timed
def check_inequalities(nmax: int = 10, half: int = 5, ps=(CANONICAL_P, UNIFORM_P), corrected: bool = False) -> CheckResult:
    """Explicit-constant inequalities for words up to ``nmax``; the product bound runs over |i|, |j| <= ``half``."""
    fails = {}
    for p in ps:
        for k, v in _inequalities(p, nmax, half, corrected).items():
            fails[f"{k}@{_fmt(tuple(p))}"] = v
    name = "explicit-constant-inequalities" + ("-corrected" if corrected else "")
    return CheckResult(name, not fails, {"failures": sum(fails.values()), **fails})


def _max_stabbing(n: int) -> int:
    # scaled by 2 * 3^(n-1): integer left endpoints, width 3, closed intervals
    events = []
    for w in sy.enumerate_words(n, "A"):
        x = 2 * sy.project_scaled(w)
        events.append((x, 0))
        events.append((x + 3, 1))
    events.sort()
    depth = best = 0
    for _, kind in events:
        depth += 1 if kind == 0 else -1
        best = max(best, depth)
    return best


def _pairs_ok(n: int, branch: str, literal: bool = False) -> bool:
    words = sy.enumerate_words(n, branch)
    for u, v in itertools.combinations(words, 2):
        if abs(2 * sy.project_scaled(u) - 2 * sy.project_scaled(v)) > 3:
            continue
        if branch == "A":
            if u[:-1] != v[:-1] or {u[-1], v[-1]} != {0, 1}:
                return False
        elif not (_u_form(u, v, literal) or _u_form(v, u, literal)):
            return False
    return True


def _u_form(i, j, literal: bool) -> bool:
    """``i = omega 0 3^(n-k-1)`` and ``j = omega 1^(n-k)`` with omega not ending in 1.

    The corrected reading lets k run to n - 1 and takes omega in U_k; the
    literal one stops at k = n - 2 with omega in T_k, which already misses
    the pair (0, 0), (0, 1) of U_2.
    """
    n = len(i)
    k_max = n - 2 if literal else n - 1
    for k in range(0, k_max + 1):
        omega = i[:k]
        if k and omega[-1] == 1:
            continue
        if not sy.is_admissible(omega, "A" if literal else "B"):
            continue
        if i == omega + (0,) + (3,) * (n - k - 1) and j == omega + (1,) * (n - k):
            return True
    return False


@_timed
def check_stabbing(nmax: int = 10, pair_max: int = 6) -> CheckResult:
    worst = max(_max_stabbing(n) for n in range(1, nmax + 1))
    a_ok = all(_pairs_ok(n, "A") for n in range(1, pair_max + 1))
    b_ok = all(_pairs_ok(n, "B") for n in range(1, pair_max + 1))
    b_literal = all(_pairs_ok(n, "B", literal=True) for n in range(1, pair_max + 1))
    return CheckResult(
        "interval-stabbing",
        worst <= 2 and a_ok and b_ok,
        {"max_multiplicity": worst, "pairs_T": a_ok, "pairs_U": b_ok, "pairs_U_literal_form": b_literal},
    )


# ----------------------------------------------------------------------------
# pressure and antichains


@_timed
def check_t0_stability(p=CANONICAL_P, rs=(1, 2, 4), depths=(200, 400), tol: float = 1e-3) -> CheckResult:
    detail = {}
    ok = True
    for r in rs:
        lo, hi = (solve_t0(p, r, depth=d) for d in depths)
        gap = abs(lo.t0 - hi.t0)
        root_err = abs(hi.p_at_t0 - r * hi.t0 * LOG3)
        grid = np.linspace(0.0, 1.0, 41)
        P = np.array([pressure(p, t, depths[-1]).value - r * t * LOG3 for t in grid])
        signs_ok = bool(np.all(P[grid < hi.t0 - 1e-3] > 0) and np.all(P[grid > hi.t0 + 1e-3] < 0))
        ok &= gap <= tol and root_err <= 1e-4 and signs_ok
        detail[f"t0_r{r}"] = hi.t0
        detail[f"gap_r{r}"] = gap
        detail[f"signs_r{r}"] = signs_ok
    detail["time_limit"] = 30.0
    return CheckResult("t0-stability", ok, detail)


@_timed
def check_antichains(p=CANONICAL_P, r: float = 2, epsilons=(1e-2, 1e-3, 1e-4), samples: int = 10_000, seed: int = 0) -> CheckResult:
    t0 = solve_t0(p, r).t0
    pot = Potential(ProbabilityVector(*p))
    ok = True
    detail = {}
    products = []
    for k, eps in enumerate(epsilons):
        g = ac.build_gamma_hat(pot, eps, r, t0)
        E = ac.extend_to_E(g)
        S = ac.project_to_full_shift(E)
        hat_hits = ac.prefix_hit_counts(g, ac.random_streams(samples, 40, "A", seed + k))
        full_hits = ac.prefix_hit_counts(S, ac.random_streams(samples, 40, "full", seed + 100 + k))
        below_eps = float(np.exp(ac.phi_hat_log(pot, E.members, r, t0)).max()) < eps
        good = bool(np.all(hat_hits == 1) and np.all(full_hits == 1) and below_eps)
        ok &= good
        products.append(eps * len(g))
        detail[f"count@{eps:g}"] = len(g)
        detail[f"ok@{eps:g}"] = good
    spread = max(products) / min(products)
    detail["eps_count_spread"] = spread
    detail["time_limit"] = 60.0
    return CheckResult("antichain-maximality", ok and spread <= 10, detail)


# ----------------------------------------------------------------------------
# quantizer


def contiguous_brute_force(m: DiscreteMeasure, n: int, r: int) -> float:
    """Best cost over all partitions of the sorted atoms into at most n runs."""
    x, w = m.atoms, m.weights
    N = x.size
    if n >= N:
        return 0.0
    best = math.inf
    for cuts in itertools.combinations(range(1, N), n - 1):
        bounds = (0,) + cuts + (N,)
        total = 0.0
        for i, j in zip(bounds[:-1], bounds[1:]):
            xs, ws = x[i:j], w[i:j]
            if r == 2:
                a = ws @ xs / ws.sum()
            else:
                a = xs[np.searchsorted(np.cumsum(ws), 0.5 * ws.sum())]
            total += float(ws @ np.abs(xs - a) ** r)
        best = min(best, total)
    return best


def grid_search(m: DiscreteMeasure, n: int, r: float = 2, step: float = 1e-3) -> float:
    """Best cost over codebooks with coordinates on a grid; no contiguity assumed."""
    grid = np.arange(m.atoms.min(), m.atoms.max() + step / 2, step)
    d = np.abs(m.atoms[None, :] - grid[:, None]) ** r  # (G, N)
    if n == 1:
        return float((d @ m.weights).min())
    if n == 2:
        best = math.inf
        for a in range(grid.size):
            best = min(best, float((np.minimum(d[a], d[a:]) @ m.weights).min()))
        return best
    if n == 3:
        best = math.inf
        for a in range(grid.size):
            da = np.minimum(d[a], d[a:])  # (G-a, N): best of {a, b}
            for b in range(da.shape[0]):
                dab = np.minimum(da[b], d[a + b :])
                best = min(best, float((dab @ m.weights).min()))
        return best
    raise ValueError("grid search is implemented for n <= 3")


def random_small_measure(rng, max_atoms: int = 12, span: float = 1.0) -> DiscreteMeasure:
    N = int(rng.integers(1, max_atoms + 1))
    x = np.sort(rng.choice(int(span * 1000) + 1, size=N, replace=False)) / 1000.0
    w = rng.random(N) + 0.05
    return DiscreteMeasure(x, w / w.sum())


@_timed
def check_quantizer_exactness(trials: int = 40, grid_trials: int = 4, seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst_brute = 0.0
    for _ in range(trials):
        m = random_small_measure(rng)
        for r in (1, 2):
            for n in (1, 2, 3):
                dp = optimal_quantizer(m, n, r).cost
                worst_brute = max(worst_brute, abs(dp - contiguous_brute_force(m, n, r)))
    worst_grid = 0.0
    below = False
    for _ in range(grid_trials):
        m = random_small_measure(rng, span=0.5)
        for n in (1, 2, 3):
            dp = optimal_quantizer(m, n, 2).cost
            g = grid_search(m, n, 2)
            below |= g < dp - 1e-12
            worst_grid = max(worst_grid, abs(g - dp))
    return CheckResult(
        "quantizer-exactness",
        worst_brute <= 1e-12 and worst_grid <= 1e-5 and not below,
        {"max_brute_gap": worst_brute, "max_grid_gap": worst_grid, "grid_beats_dp": below},
    )


@functools.lru_cache(maxsize=8)
def empirical_fit(p, r: int = 2, depth: int = 12, grid=EMPIRICAL_GRID):
    chi = solve_t0(p, r).chi_r
    fit = estimate_dimension(discretize(p, depth), r, grid)
    return chi, fit


@_timed
def check_dimension_slope(ps=(CANONICAL_P, UNIFORM_P), depth: int = 12, grid=EMPIRICAL_GRID, tol: float = 0.1) -> CheckResult:
    ok = True
    detail = {}
    for label, p in zip(("canonical", "uniform"), ps):
        chi, fit = empirical_fit(tuple(p), 2, depth, tuple(grid))
        gap = abs(fit.slope - chi)
        ok &= gap <= tol
        detail[f"chi_{label}"] = chi
        detail[f"slope_{label}"] = fit.slope
        detail[f"gap_{label}"] = gap
    detail["time_limit"] = 120.0 * len(ps)
    return CheckResult("dimension-slope", ok, detail)


@_timed
def check_splitting(p=CANONICAL_P, r: int = 2, epsilons=(1e-2, 1e-3), budgets=(1, 2, 4), depth: int = 10) -> CheckResult:
    t0 = solve_t0(p, r).t0
    ok = True
    detail = {}
    for eps in epsilons:
        E = ac.extend_to_E(ac.build_gamma_hat(p, eps, r, t0))
        for c in splitting_checks(p, E, budgets, r, depth):
            ok &= c.holds
            detail[f"margin@{eps:g},m={c.m_inner}"] = c.bound + c.slack - c.codebook_cost
            detail[f"above_V@{eps:g},m={c.m_inner}"] = c.codebook_cost >= c.optimal_cost
    return CheckResult("self-similar-splitting", ok, detail)


@_timed
def check_scaling(ps=(CANONICAL_P,), depth: int = 12, grid=EMPIRICAL_GRID, band: float = 20.0) -> CheckResult:
    ok = True
    detail = {}
    for k, p in enumerate(ps):
        chi, fit = empirical_fit(tuple(p), 2, depth, tuple(grid))
        table = scaling_diagnostics(fit, chi, band)
        good = table.within_band and table.spearman_below >= 0 and table.spearman_above <= 0
        ok &= good
        detail[f"ratio_{k}"] = table.ratio
        detail[f"spearman_below_{k}"] = table.spearman_below
        detail[f"spearman_above_{k}"] = table.spearman_above
    return CheckResult("scaling-diagnostics", ok, detail)


# ----------------------------------------------------------------------------


def suite(level: str = "full", seed: int = 0) -> list:
    """``(name, thunk)`` pairs in execution order."""
    if level not in ("full", "quick"):
        raise ValueError(f"unknown level {level!r}")
    full = level == "full"
    return [
        ("hausdorff", lambda: check_hausdorff()),
        ("unity", lambda: check_partition_of_unity(2000 if full else 500)),
        ("oracle", lambda: check_oracle_equivalence(8 if full else 6)),
        ("dp", lambda: check_dp_equivalence(8 if full else 6)),
        ("inequalities", lambda: check_inequalities(10 if full else 7, 5 if full else 2)),
        ("stabbing", lambda: check_stabbing(10 if full else 7, 6 if full else 4)),
        ("t0", lambda: check_t0_stability()),
        ("antichain", lambda: check_antichains(epsilons=(1e-2, 1e-3, 1e-4) if full else (1e-2, 1e-3), seed=seed)),
        ("quantizer", lambda: check_quantizer_exactness(40 if full else 10, 4 if full else 1, seed=seed)),
        ("slope", lambda: check_dimension_slope(depth=12 if full else 9, grid=EMPIRICAL_GRID if full else (8, 16, 32, 64))),
        ("splitting", lambda: check_splitting(epsilons=(1e-2, 1e-3) if full else (1e-2,), depth=10 if full else 8)),
        ("scaling", lambda: check_scaling(depth=12 if full else 9, grid=EMPIRICAL_GRID if full else (8, 16, 32, 64))),
    ]


def run_suite(level: str = "full", seed: int = 0, only=None, stream=None, timings: bool = True) -> list:
    results = []
    for name, thunk in suite(level, seed):
        if only and name not in only:
            continue
        res = thunk()
        results.append(res)
        if stream is not None:
            print(res.line(timings), file=stream, flush=True)
    return results
