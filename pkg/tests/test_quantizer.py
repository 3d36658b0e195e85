import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import minimize_scalar

from qdim import antichain as ac
from qdim.exceptions import DomainError
from qdim.measure import DiscreteMeasure, discretize
from qdim.pressure import solve_t0
from qdim.quantizer import (
    antichain_codebook,
    cost,
    estimate_dimension,
    fit_power_law,
    fit_to_csv,
    lloyd_refine,
    modified_cost,
    optimal_quantizer,
    quantization_errors,
    required_depth,
    scaling_diagnostics,
    splitting_checks,
)
from qdim.verify import contiguous_brute_force, grid_search

P = (0.4, 0.35, 0.25)
TWO = DiscreteMeasure.from_points([0.0, 1.0], [0.5, 0.5])

small_measures = st.lists(
    st.tuples(st.floats(0, 4.5, allow_nan=False), st.floats(0.01, 1.0)), min_size=2, max_size=9, unique_by=lambda t: t[0]
).map(lambda pairs: DiscreteMeasure.from_points([a for a, _ in pairs], [w for _, w in pairs]))


def exhaustive_assignment(m, n, r):
    """Best cost over every map atoms -> n labels, each cell at its optimal centre."""
    best = np.inf
    for labels in itertools.product(range(n), repeat=len(m)):
        lab = np.array(labels)
        c = 0.0
        for k in range(n):
            sel = lab == k
            if not sel.any():
                continue
            x, w = m.atoms[sel], m.weights[sel]
            if r == 2:
                a = w @ x / w.sum()
            else:
                cum = np.cumsum(w)
                a = x[np.searchsorted(cum, 0.5 * cum[-1])]
            c += w @ np.abs(x - a) ** r
        best = min(best, c)
    return best


def test_cost_examples():
    assert cost(TWO, [0.5], 2) == pytest.approx(0.25)
    assert cost(TWO, [0.0, 1.0, 3.0], 2) == 0.0
    m = discretize(P, 14)
    assert cost(m, [m.mean()], 2) == pytest.approx(1.56375, abs=1e-5)


def test_optimal_quantizer_examples():
    m = discretize(P, 6)
    cb = optimal_quantizer(m, 1, 2)
    assert cb.points[0] == pytest.approx(m.mean(), abs=1e-12)
    assert cb.cost == pytest.approx(m.variance(), rel=1e-10)
    cb = optimal_quantizer(TWO, 2, 2)
    np.testing.assert_allclose(cb.points, [0, 1])
    assert cb.cost == 0 and cb.clamped
    cb = optimal_quantizer(m, len(m) + 3, 1)
    assert cb.cost == 0 and len(cb) == len(m)


def test_codebook_invariants():
    m = discretize(P, 8)
    for r in (1, 2):
        cb = optimal_quantizer(m, 17, r)
        assert len(cb.points) == len(cb.cell_masses) == 17
        assert cb.cell_masses.sum() == pytest.approx(m.total_mass, abs=1e-12)
        assert cb.cost == pytest.approx(cost(m, cb.points, r), abs=1e-12)
        assert np.all(np.diff(cb.points) > 0)


@pytest.mark.parametrize("r", [1, 2])
def test_dp_matches_naive_and_is_monotone(r):
    m = discretize(P, 7)
    fast = quantization_errors(m, 60, r)
    slow = quantization_errors(m, 60, r, naive=True)
    np.testing.assert_allclose(fast[1:], slow[1:], rtol=1e-9, atol=1e-13)
    assert np.all(np.diff(fast[1:]) <= 1e-15)
    assert np.isnan(fast[0])


@pytest.mark.parametrize("r", [1, 2])
def test_boundary_errors_below_plain(r):
    m = discretize(P, 7)
    u = quantization_errors(m, 40, r, boundary=True)
    V = quantization_errors(m, 40, r)
    assert np.all(u[1:] <= V[1:] + 1e-15)
    cb = optimal_quantizer(m, 5, r, boundary=True)
    assert cb.cost == pytest.approx(u[5], rel=1e-9, abs=1e-15)


@settings(max_examples=30, deadline=None)
@given(small_measures, st.integers(1, 3), st.sampled_from([1, 2]))
def test_dp_equals_contiguous_brute_force(m, n, r):
    assert optimal_quantizer(m, n, r).cost == pytest.approx(contiguous_brute_force(m, n, r), rel=1e-9, abs=1e-14)


@pytest.mark.parametrize("seed", range(4))
def test_dp_equals_exhaustive_assignment(seed):
    rng = np.random.default_rng(seed)
    m = DiscreteMeasure.from_points(rng.uniform(0, 4.5, 7), rng.uniform(0.1, 1, 7))
    for r in (1, 2):
        for n in (2, 3):
            assert optimal_quantizer(m, n, r).cost == pytest.approx(exhaustive_assignment(m, n, r), rel=1e-9, abs=1e-14)


def test_dp_against_grid_search():
    rng = np.random.default_rng(7)
    m = DiscreteMeasure.from_points(rng.uniform(0, 0.5, 6), rng.uniform(0.1, 1, 6))
    for n in (1, 2):
        assert abs(optimal_quantizer(m, n, 2).cost - grid_search(m, n, 2)) <= 1e-5


def test_lloyd_fixed_point_of_exact_codebook():
    m = discretize(P, 8)
    cb = optimal_quantizer(m, 12, 2)
    refined = lloyd_refine(m, cb, 2)
    assert abs(refined.cost - cb.cost) <= 1e-12


def test_lloyd_monotone_for_r3():
    m = discretize(P, 7)
    rng = np.random.default_rng(0)
    start = np.sort(rng.uniform(0, 4.5, 6))
    out = lloyd_refine(m, start, 3)
    hist = np.array(out.history)
    assert np.all(np.diff(hist) <= 1e-15)
    assert out.cost <= cost(m, start, 3)
    assert not out.exact


def test_r2_cell_minimizer_is_weighted_mean():
    rng = np.random.default_rng(3)
    x = np.sort(rng.uniform(0, 4.5, 20))
    w = rng.uniform(0.1, 1, 20)
    res = minimize_scalar(lambda a: w @ (x - a) ** 2, bounds=(x[0], x[-1]), method="bounded", options={"xatol": 1e-12})
    m = DiscreteMeasure.from_points(x, w)
    assert optimal_quantizer(m, 1, 2).points[0] == pytest.approx(res.x, abs=1e-9)


def test_general_r_heuristic():
    m = discretize(P, 6)
    cb = optimal_quantizer(m, 4, 3)
    assert not cb.exact
    assert cb.cost <= cost(m, optimal_quantizer(m, 4, 2).points, 3) + 1e-15
    with pytest.raises(DomainError):
        optimal_quantizer(m, 4, 3, boundary=True)


def test_modified_cost():
    m = discretize(P, 8)
    pts = optimal_quantizer(m, 6, 2).points
    assert modified_cost(m, pts, 2) <= cost(m, pts, 2)
    single = DiscreteMeasure.from_points([0.1], [0.3], normalize=False)
    assert modified_cost(single, [3.0], 2) == pytest.approx(0.3 * 0.1**2)
    assert modified_cost(single, [], 1) == pytest.approx(0.03)
    dense = np.concatenate([np.linspace(0, 0.2, 30), np.linspace(4.3, 4.5, 30), pts])
    assert modified_cost(m, dense, 2) == pytest.approx(cost(m, dense, 2), rel=1e-9)


def test_affine_covariance():
    m = discretize(P, 6)
    pts = optimal_quantizer(m, 5, 2).points
    for w in [(1,), (3, 0), (0, 1, 1)]:
        img = m.pushforward(w)
        sc = 3.0 ** -len(w)
        moved = img.atoms[0] - sc * m.atoms[0] + sc * pts
        for r in (1, 2):
            assert cost(img, moved, r) == pytest.approx(sc**r * cost(m, pts, r), rel=1e-10)


def test_fit_synthetic_power_law():
    n = np.array([16, 32, 64, 128, 256])
    for s in (0.5, 0.86, 1.3):
        fit = fit_power_law(n, n ** (-1.0 / s))
        assert fit.slope == pytest.approx(s, abs=1e-9)
        assert fit.discarded == ()
    tab = scaling_diagnostics(fit_power_law(n, n ** (-1 / 0.8)), 0.8)
    np.testing.assert_allclose(tab.column("n_e_chi"), 1.0, rtol=1e-10)
    assert tab.spearman_below == pytest.approx(1.0)
    assert tab.spearman_above == pytest.approx(-1.0)


def test_fit_discards_transient():
    n = np.array([2, 4, 16, 32, 64, 128])
    e = n ** -1.0
    e[:2] *= 3
    fit = fit_power_law(n, e)
    assert fit.discarded == (2, 4)
    assert fit.slope == pytest.approx(1.0, abs=1e-9)


def test_uniform_atoms_slope_one():
    m = DiscreteMeasure.from_points((np.arange(4096) + 0.5) / 4096)
    fit = estimate_dimension(m, 2, (16, 32, 64, 128, 256), boundary=False)
    assert fit.slope == pytest.approx(1.0, abs=0.05)


def test_estimate_dimension_guard():
    with pytest.raises(DomainError, match="depth >= 8"):
        estimate_dimension(discretize(P, 6), 2, (16, 512))
    assert required_depth(512) == 8


def test_antichain_codebook_and_splitting():
    t0 = solve_t0(P, 2, depth=200).t0
    gE = ac.extend_to_E(ac.build_gamma_hat(P, 1e-2, 2, t0))
    m = discretize(P, 8)
    cb1 = antichain_codebook(P, gE, 1, 2, depth=8)
    centroid = optimal_quantizer(m, 1, 2).points[0]
    from qdim.symbolic import project

    expected = np.unique([project(w) + 3.0 ** -len(w) * centroid for w in gE])
    np.testing.assert_allclose(cb1.points, expected)
    for chk in splitting_checks(P, gE, (1, 2), 2, depth=8):
        assert chk.holds
        assert chk.optimal_cost <= chk.codebook_cost
        assert chk.codebook_cost <= chk.bound


def test_fit_to_csv():
    n = (16, 32, 64)
    fit = fit_power_law(n, np.array(n, float) ** -1.2)
    lines = fit_to_csv(fit, 0.8).splitlines()
    assert lines[0] == "n,V,e,n_e_chi" and len(lines) == 4
