"""Optimal scalar quantization of discrete measures and dimension estimates.

For r >= 1 the optimal cells of an n-point quantizer on the line are
contiguous runs of atoms, so ``V_{n,r}`` is a shortest path over cut
positions: ``V_l(j) = min_i V_{l-1}(i) + c(i, j)``, where ``c(i, j)`` is the
best one-point distortion of atoms ``i..j-1``. With prefix sums of
weight, first and second moment ``c`` costs O(1) for r = 2 (variance
decomposition) and amortized O(1) for r = 1 (weighted median found by a
forward-moving pointer). The minimizing cut is
monotone in ``j``, so each layer is solved by divide and conquer.

The boundary-anchored variant adds the two hull endpoints 0 and 9/2 as free
targets, which gives the modified error ``u_{n,r}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.stats import spearmanr

from . import _kernels
from ._validation import as_measure, check_order, check_points, check_size
from .exceptions import DomainError, SizeLimitError
from .measure import MAX_DEPTH, DiscreteMeasure, discretize
from .pressure import as_potential
from .symbolic import HULL_WIDTH, count_words, project

DEFAULT_GRID = (16, 32, 64, 128, 256, 512)
RESIDUAL_LIMIT = 0.02
DEFAULT_BAND = 20.0
CODEBOOK_CAP = 10**7


@dataclass(frozen=True)
class Codebook:
    """Sorted codebook points with the masses of their Voronoi cells."""

    points: np.ndarray
    cell_masses: np.ndarray
    cost: float
    r: float
    exact: bool
    clamped: bool = False
    boundary: bool = False
    history: tuple = field(default=(), repr=False)

    def __len__(self):
        return self.points.size


# ----------------------------------------------------------------------------
# distortion


def _nearest(points: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Index of the nearest codebook point for each x (points sorted)."""
    mids = 0.5 * (points[1:] + points[:-1])
    return np.searchsorted(mids, x)


def _distances(m: DiscreteMeasure, pts: np.ndarray) -> np.ndarray:
    return np.abs(m.atoms - pts[_nearest(pts, m.atoms)])


def cost(m: DiscreteMeasure, points, r: float = 2) -> float:
    """``sum_k w_k min_j |x_k - a_j|^r``."""
    r = check_order(r)
    pts = check_points(points)
    return float(m.weights @ _distances(m, pts) ** r)


def modified_cost(m: DiscreteMeasure, points, r: float = 2) -> float:
    """Distortion against the codebook extended by the hull endpoints 0 and 9/2.

    An empty codebook is allowed here: the endpoints alone are a valid target.
    """
    r = check_order(r)
    pts = np.unique(np.asarray(points, dtype=float).ravel())
    d = np.minimum(m.atoms - 0.0, HULL_WIDTH - m.atoms)
    if np.any(d < 0):
        raise DomainError("modified cost needs atoms inside [0, 9/2]")
    if pts.size:
        d = np.minimum(d, _distances(m, pts))
    return float(m.weights @ d**r)


def cell_masses(m: DiscreteMeasure, points) -> np.ndarray:
    pts = check_points(points)
    return np.bincount(_nearest(pts, m.atoms), weights=m.weights, minlength=pts.size)


# ----------------------------------------------------------------------------
# exact DP


class _Prefix:
    """Prefix sums of weight, moment and square moment on centred atoms."""

    def __init__(self, m: DiscreteMeasure, r_code: int):
        self.shift = float(m.weights @ m.atoms / m.weights.sum())
        self.X = m.atoms - self.shift
        self.W = np.concatenate([[0.0], np.cumsum(m.weights)])
        self.S1 = np.concatenate([[0.0], np.cumsum(m.weights * self.X)])
        self.S2 = np.concatenate([[0.0], np.cumsum(m.weights * self.X**2)])
        self.r_code = r_code
        self.N = m.atoms.size

    def layer(self, prev, cur, opt, jlo, jhi, ilo, ihi, strict, naive=False):
        fn = _kernels.dp_layer_naive if naive else _kernels.dp_layer
        fn(prev, cur, opt, self.X, self.W, self.S1, self.S2, self.r_code, jlo, jhi, ilo, ihi, strict)

    def center(self, i: int, j: int) -> float:
        """Optimal single point for atoms i..j-1, in original coordinates."""
        if self.r_code == 2:
            return self.shift + (self.S1[j] - self.S1[i]) / (self.W[j] - self.W[i])
        return self.shift + self.X[_kernels.median_index(self.W, i, j)]

    def anchor_costs(self, r: int):
        """Cost of sending atoms [0, j) to 0 and atoms [j, N) to 9/2, for every j."""
        x = self.X + self.shift
        w = np.diff(self.W)
        left = np.concatenate([[0.0], np.cumsum(w * np.abs(x) ** r)])
        right_terms = w * np.abs(HULL_WIDTH - x) ** r
        right = np.concatenate([np.cumsum(right_terms[::-1])[::-1], [0.0]])
        return left, right


def _r_code(r) -> int:
    return 2 if check_order(r, exact=True) == 2 else 1


def _layers(pre: _Prefix, boundary: bool):
    """Per-layer ranges ``(jlo, jhi, ilo, ihi, strict)``; ``strict=0`` allows empty cells."""
    N = pre.N
    if boundary:
        def bounds(l):
            return 0, N, 0, N, 0
    else:
        def bounds(l):
            return l, N, l - 1, N - 1, 1
    return bounds


def _initial(pre: _Prefix, boundary: bool, r: int):
    N = pre.N
    if boundary:
        left, right = pre.anchor_costs(r)
        return left.copy(), right
    prev = np.full(N + 1, np.inf)
    prev[0] = 0.0
    return prev, None


def quantization_errors(m: DiscreteMeasure, n_max: int, r: int = 2, boundary: bool = False, naive: bool = False) -> np.ndarray:
    """Optimal errors for every codebook size 0..n_max from one DP sweep.

    Entry ``n`` is ``V_{n,r}`` (``u_{n,r}`` when ``boundary``); entry 0 is
    ``nan`` for V and the endpoint-only error for u. Sizes at or beyond the
    atom count give 0.
    """
    n_max = check_size(n_max, "n_max")
    r_code = _r_code(r)
    pre = _Prefix(m, r_code)
    N = pre.N
    bounds = _layers(pre, boundary)
    prev, right = _initial(pre, boundary, r_code)
    out = np.full(n_max + 1, np.nan)
    if boundary:
        out[0] = float(np.min(prev + right))
    cur = np.empty(N + 1)
    opt = np.empty(N + 1, dtype=np.int64)
    for l in range(1, n_max + 1):
        if not boundary and l >= N:
            out[l:] = 0.0
            break
        jlo, jhi, ilo, ihi, strict = bounds(l)
        cur[:] = np.inf
        pre.layer(prev, cur, opt, jlo, jhi, ilo, ihi, strict, naive)
        out[l] = float(np.min(cur + right)) if boundary else float(cur[N])
        prev, cur = cur, prev
    return out


def _partition(m: DiscreteMeasure, n: int, r_code: int, boundary: bool, naive: bool = False):
    """Cut positions of an optimal n-cell partition, with checkpointed backtracking.

    Layer arrays are kept every ``ceil(sqrt(n))`` layers; each segment is
    recomputed once with its split tables while walking back, so memory is
    O(sqrt(n) * atoms) instead of O(n * atoms).
    """
    pre = _Prefix(m, r_code)
    N = pre.N
    bounds = _layers(pre, boundary)
    first, right = _initial(pre, boundary, r_code)
    K = max(1, math.isqrt(n - 1) + 1)
    checkpoints = {0: first.copy()}
    prev = first.copy()
    cur = np.empty(N + 1)
    opt = np.empty(N + 1, dtype=np.int64)
    for l in range(1, n + 1):
        jlo, jhi, ilo, ihi, strict = bounds(l)
        cur[:] = np.inf
        pre.layer(prev, cur, opt, jlo, jhi, ilo, ihi, strict, naive)
        prev, cur = cur, prev
        if l % K == 0 and l < n:
            checkpoints[l] = prev.copy()
    j = int(np.argmin(prev + right)) if boundary else N
    tail = (j, N)
    cells = []
    for s in sorted(checkpoints, reverse=True):
        e = min(s + K, n)
        layer = checkpoints[s].copy()
        opts = {}
        for l in range(s + 1, e + 1):
            jlo, jhi, ilo, ihi, strict = bounds(l)
            nxt = np.full(N + 1, np.inf)
            o = np.empty(N + 1, dtype=np.int64)
            pre.layer(layer, nxt, o, jlo, jhi, ilo, ihi, strict, naive)
            opts[l] = o
            layer = nxt
        for l in range(e, s, -1):
            i = int(opts[l][j])
            cells.append((i, j))
            j = i
    cells.reverse()
    head = (0, j)
    return pre, cells, head, tail


def _clamped_codebook(m: DiscreteMeasure, r: float, boundary: bool) -> Codebook:
    pts = m.atoms.copy()
    c = modified_cost(m, pts, r) if boundary else cost(m, pts, r)
    return Codebook(pts, m.weights.copy(), c, float(r), True, clamped=True, boundary=boundary)


def optimal_quantizer(m, n: int, r: int = 2, boundary: bool = False, naive: bool = False) -> Codebook:
    """Exact optimal n-point codebook for r in {1, 2}.

    For any other r >= 1 this returns the best of a DP-seeded Lloyd run and
    five randomly seeded restarts, flagged ``exact=False``.

    Parameters
    ----------
    m : DiscreteMeasure or array-like
    n : int
        Codebook size. ``n >= len(m)`` returns all atoms at zero cost with
        ``clamped=True``.
    boundary : bool
        Minimize the modified error (endpoints 0 and 9/2 are free targets).
        Empty cells are permitted, so fewer than n points may be returned.
    """
    m = as_measure(m)
    n = check_size(n)
    r = check_order(r)
    if r not in (1, 2):
        if boundary:
            raise DomainError("boundary-anchored quantizers need r in {1, 2}")
        return _heuristic_quantizer(m, n, r)
    if n >= len(m):
        return _clamped_codebook(m, r, boundary)
    r_code = _r_code(r)
    pre, cells, _, _ = _partition(m, n, r_code, boundary, naive)
    pts = np.array([pre.center(i, j) for i, j in cells if j > i])
    if boundary:
        c = modified_cost(m, pts, r)
    else:
        c = cost(m, pts, r)
    pts = np.unique(pts)
    masses = cell_masses(m, pts) if pts.size else np.zeros(0)
    return Codebook(pts, masses, c, float(r), True, boundary=boundary)


# ----------------------------------------------------------------------------
# Lloyd iteration


def _cell_minimizer(x: np.ndarray, w: np.ndarray, r: float, current: float) -> float:
    if r == 2:
        return float(w @ x / w.sum())
    if r == 1:
        cum = np.cumsum(w)
        return float(x[np.searchsorted(cum, 0.5 * cum[-1])])
    if x.size == 1:
        return float(x[0])
    res = minimize_scalar(
        lambda a: float(w @ np.abs(x - a) ** r),
        bounds=(float(x[0]), float(x[-1])),
        method="bounded",
        options={"xatol": 1e-12 * max(1.0, abs(float(x[-1])))},
    )
    value = float(w @ np.abs(x - current) ** r)
    return float(res.x) if res.fun < value else current


def _reseed(m: DiscreteMeasure, pts: np.ndarray, idx: np.ndarray, r: float) -> float:
    """Mass median of the cell with the largest distortion."""
    d = np.abs(m.atoms - pts[idx]) ** r * m.weights
    per_cell = np.bincount(idx, weights=d, minlength=pts.size)
    k = int(np.argmax(per_cell))
    sel = idx == k
    x, w = m.atoms[sel], m.weights[sel]
    cum = np.cumsum(w)
    return float(x[np.searchsorted(cum, 0.5 * cum[-1])])


def lloyd_refine(m, initial, r: float = 2, max_iter: int = 200, tol: float = 1e-12) -> Codebook:
    """Alternate nearest-point assignment and per-cell optimal points.

    Each step is accepted only if it does not increase the cost, so the
    returned ``history`` is nonincreasing. Empty cells are moved to the mass
    median of the currently worst cell.
    """
    m = as_measure(m)
    r = check_order(r)
    pts = check_points(initial.points if isinstance(initial, Codebook) else initial)
    current = cost(m, pts, r)
    history = [current]
    for _ in range(max_iter):
        idx = _nearest(pts, m.atoms)
        counts = np.bincount(idx, minlength=pts.size)
        new = pts.copy()
        for k in range(pts.size):
            if counts[k] == 0:
                new[k] = _reseed(m, pts, idx, r)
                continue
            sel = idx == k
            new[k] = _cell_minimizer(m.atoms[sel], m.weights[sel], r, pts[k])
        new = np.sort(new)
        if np.unique(new).size < new.size:
            new = np.unique(new)
        value = cost(m, new, r)
        if value > current:
            break
        improvement = current - value
        pts, current = new, value
        history.append(current)
        if improvement <= tol * max(current, 1e-300):
            break
    return Codebook(pts, cell_masses(m, pts), current, float(r), False, history=tuple(history))


def _heuristic_quantizer(m: DiscreteMeasure, n: int, r: float, restarts: int = 5, seed: int = 0) -> Codebook:
    if n >= len(m):
        return _clamped_codebook(m, r, False)
    seeds = [optimal_quantizer(m, n, 2 if r > 1.5 else 1).points]
    rng = np.random.default_rng(seed)
    for _ in range(restarts):
        seeds.append(rng.choice(m.atoms, size=n, replace=False, p=m.weights / m.weights.sum()))
    best = None
    for s in seeds:
        cb = lloyd_refine(m, s, r)
        if best is None or cb.cost < best.cost:
            best = cb
    return best


# ----------------------------------------------------------------------------
# antichain codebooks


def antichain_codebook(p, gE, m_inner: int, r: int = 2, depth: int = 10, measure: DiscreteMeasure | None = None) -> Codebook:
    """Union of the images S_i(beta) over antichain members, beta optimal with ``m_inner`` points.

    The cost is evaluated against ``discretize(p, depth)`` (or ``measure``).
    """
    m_inner = check_size(m_inner, "m_inner")
    pot = as_potential(p)
    m = discretize(pot, depth) if measure is None else measure
    beta = optimal_quantizer(m, m_inner, r).points
    members = list(gE)
    if len(members) * beta.size > CODEBOOK_CAP:
        raise SizeLimitError(f"antichain codebook would exceed {CODEBOOK_CAP} points", cap=CODEBOOK_CAP)
    shifts = np.array([project(w) for w in members])
    scales = np.array([3.0 ** -len(w) for w in members])
    pts = np.unique((shifts[:, None] + scales[:, None] * beta[None, :]).ravel())
    return Codebook(pts, cell_masses(m, pts), cost(m, pts, r), float(r), False)


@dataclass(frozen=True)
class SplittingCheck:
    """Both sides of the self-similar splitting bound on a discretized measure."""

    m_inner: int
    size: int
    codebook_cost: float
    optimal_cost: float
    bound: float
    slack: float
    weight_sum: float

    @property
    def holds(self) -> bool:
        return self.codebook_cost <= self.bound + self.slack and self.optimal_cost <= self.codebook_cost + 1e-15


def splitting_slack(r: int, depth: int) -> float:
    """Discretization allowance ``r (9/2)^r 3^(-depth r)`` for the splitting bound."""
    return r * HULL_WIDTH**r * 3.0 ** (-depth * r)


def lipschitz_slack(r: int, depth: int, weight_sum: float) -> float:
    """Worst-case discretization error of the splitting bound with midpoint atoms.

    Moving every atom by at most ``(9/4) 3^-depth`` changes any distortion of
    order r by at most ``r (9/2)^(r-1)`` times that; it enters once on the
    left and ``weight_sum`` times on the right. Much larger than what is
    observed, so it is reported but not used as the pass threshold.
    """
    delta = r * HULL_WIDTH ** (r - 1) * 0.5 * HULL_WIDTH * 3.0**-depth
    return (1.0 + weight_sum) * delta


def splitting_checks(p, gE, budgets=(1, 2, 4), r: int = 2, depth: int = 10) -> list:
    """Evaluate ``cost(union S_i beta) <= sum_i 3^(-|i| r) psi(i) V_m`` for each inner budget m.

    ``V_N`` for the resulting codebook sizes comes from a single DP sweep.
    """
    pot = as_potential(p)
    m = discretize(pot, depth)
    members = list(gE)
    K = math.fsum(3.0 ** (-len(w) * r) * pot.psi(w) for w in members)
    books = [(check_size(b, "m_inner"), antichain_codebook(pot, members, b, r, depth, measure=m)) for b in budgets]
    n_top = max(len(cb) for _, cb in books)
    V = quantization_errors(m, n_top, r)
    out = []
    for b, cb in books:
        out.append(
            SplittingCheck(
                m_inner=b,
                size=len(cb),
                codebook_cost=cb.cost,
                optimal_cost=float(V[len(cb)]),
                bound=K * optimal_quantizer(m, b, r).cost,
                slack=splitting_slack(r, depth),
                weight_sum=K,
            )
        )
    return out


def splitting_check(p, gE, m_inner: int, r: int = 2, depth: int = 10) -> SplittingCheck:
    return splitting_checks(p, gE, (m_inner,), r, depth)[0]


# ----------------------------------------------------------------------------
# dimension estimates


@dataclass(frozen=True)
class DimensionFit:
    """Least-squares fit of ``log n`` against ``-log e_{n,r}``."""

    n_grid: tuple
    errors_e: np.ndarray
    slope: float
    intercept: float
    r: float
    residual: float
    errors_V: np.ndarray | None = None
    errors_u: np.ndarray | None = None
    discarded: tuple = ()

    def predict_log_n(self, e) -> np.ndarray:
        return self.slope * -np.log(np.asarray(e, float)) + self.intercept


def _fit(n_grid, e):
    x = -np.log(e)
    y = np.log(np.asarray(n_grid, float))
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.max(np.abs(y - (slope * x + intercept))))
    return float(slope), float(intercept), residual


def fit_power_law(n_grid, errors_e, r: float = 2, errors_V=None, errors_u=None) -> DimensionFit:
    """Slope fit with the fixed transient rule: drop the two smallest n if the residual exceeds 0.02."""
    n_grid = tuple(int(n) for n in n_grid)
    e = np.asarray(errors_e, float)
    if len(n_grid) != e.size or e.size < 2:
        raise DomainError("need at least two (n, e) pairs")
    if np.any(e <= 0):
        raise DomainError("errors must be positive for a log-log fit")
    slope, intercept, residual = _fit(n_grid, e)
    discarded = ()
    if residual > RESIDUAL_LIMIT and len(n_grid) >= 4:
        order = np.argsort(n_grid)
        keep = np.sort(order[2:])
        discarded = tuple(sorted(n_grid[k] for k in order[:2]))
        slope, intercept, residual = _fit([n_grid[k] for k in keep], e[keep])
    return DimensionFit(n_grid, e, slope, intercept, float(r), residual, errors_V, errors_u, discarded)


def required_depth(n_max: int) -> int:
    """Smallest discretization depth whose atom count exceeds ``4 n_max``."""
    for d in range(1, MAX_DEPTH + 1):
        if count_words(d) > 4 * n_max:
            return d
    raise DomainError(f"no depth up to {MAX_DEPTH} supports n = {n_max}")


def estimate_dimension(m, r: int = 2, n_grid=DEFAULT_GRID, boundary: bool = True) -> DimensionFit:
    """Empirical quantization dimension from exact errors on ``n_grid``.

    Raises
    ------
    DomainError
        If some n is not below a quarter of the atom count.
    """
    m = as_measure(m)
    n_grid = tuple(sorted(check_size(n) for n in n_grid))
    r_code = _r_code(r)
    n_max = n_grid[-1]
    if not 4 * n_max < len(m):
        raise DomainError(
            f"n = {n_max} needs more than {4 * n_max} atoms (have {len(m)}); "
            f"use a discretization of depth >= {required_depth(n_max)}"
        )
    V = quantization_errors(m, n_max, r_code)
    idx = list(n_grid)
    V_grid = V[idx]
    u_grid = quantization_errors(m, n_max, r_code, boundary=True)[idx] if boundary else None
    e = V_grid ** (1.0 / r_code)
    return fit_power_law(n_grid, e, r_code, V_grid, u_grid)


@dataclass(frozen=True)
class ScalingTable:
    columns: tuple
    rows: tuple
    ratio: float
    band: float
    spearman_below: float
    spearman_above: float

    @property
    def within_band(self) -> bool:
        return self.ratio <= self.band

    def column(self, name: str) -> np.ndarray:
        k = self.columns.index(name)
        return np.array([row[k] for row in self.rows], dtype=float)


def scaling_diagnostics(fit: DimensionFit, chi: float, band: float = DEFAULT_BAND) -> ScalingTable:
    """Columns ``n e^chi``, ``n e^(0.9 chi)``, ``n e^(1.1 chi)`` and, if available, ``n u^(0.9 chi / r)``.

    ``spearman_below`` / ``spearman_above`` are the rank correlations of the
    0.9 chi and 1.1 chi columns with n.
    """
    n = np.asarray(fit.n_grid, float)
    e = fit.errors_e
    cols = ["n", "e", "n_e_chi", "n_e_below", "n_e_above"]
    data = [n, e, n * e**chi, n * e ** (0.9 * chi), n * e ** (1.1 * chi)]
    if fit.errors_u is not None:
        cols.append("n_u_below")
        data.append(n * np.asarray(fit.errors_u) ** (0.9 * chi / fit.r))
    main = data[2]
    rows = tuple(tuple(float(v) for v in row) for row in zip(*data))
    below = float(spearmanr(n, data[3]).statistic) if n.size > 1 else 0.0
    above = float(spearmanr(n, data[4]).statistic) if n.size > 1 else 0.0
    return ScalingTable(tuple(cols), rows, float(main.max() / main.min()), band, below, above)


def fit_to_csv(fit: DimensionFit, chi: float) -> str:
    """Rows ``n,V,e,n_e_chi``."""
    V = fit.errors_V if fit.errors_V is not None else fit.errors_e**fit.r
    lines = ["n,V,e,n_e_chi"]
    for n, v, e in zip(fit.n_grid, V, fit.errors_e):
        lines.append(f"{n},{v:.17g},{e:.17g},{n * e**chi:.17g}")
    return "\n".join(lines) + "\n"


def fit_summary(fit: DimensionFit, chi: float) -> dict:
    return {"r": fit.r, "slope": fit.slope, "chi_r": chi, "abs_gap": abs(fit.slope - chi)}
