import math

import numpy as np
import pytest

from abperc import abgraph as ag
from abperc import analysis as an
from abperc import geometry as G
from abperc import pointprocess as pp


# ---------------------------------------------------------------------------
# constants and cell areas
# ---------------------------------------------------------------------------

def test_pc_table():
    assert an.site_percolation_pc(2) == 0.5
    assert 0 < an.site_percolation_pc(3) < 1
    with pytest.raises(ValueError):
        an.site_percolation_pc(4)
    assert an.site_percolation_pc(4, override=0.2) == 0.2


def test_published_coefficient_matches_quadrature():
    # the published 4-decimal flower coefficient agrees with the quadrature
    # area to its printed precision
    assert abs(an.A2_COEFF - G.cell_area(2, 2.0)) < 5e-5
    assert an.lattice_cell_area(2, 2.0) == pytest.approx(0.8227)
    assert an.lattice_cell_area(3, 2 * math.sqrt(3)) == pytest.approx(1.0)


# ---------------------------------------------------------------------------
# bounds
# ---------------------------------------------------------------------------

def test_mu_c_lower_bounds():
    entries = {e.name: e for e in an.mu_c_lower_bounds(1.0, 1.0, 1.4, 1.2)}
    assert entries["mu_c_lower"].applicable
    assert entries["mu_c_lower"].value == pytest.approx(0.4)
    assert not entries["mu_c_infinite"].applicable
    entries = {e.name: e for e in an.mu_c_lower_bounds(1.0, 1.0, 2.0, 1.5)}
    assert entries["mu_c_infinite"].applicable
    assert entries["mu_c_infinite"].value == math.inf
    # lambda at the upper critical point: vacuous zero bound
    entries = {e.name: e for e in an.mu_c_lower_bounds(1.4, 1.0, 1.4, 1.2)}
    assert not entries["mu_c_lower"].applicable
    assert entries["mu_c_lower"].value == 0.0


def test_mu_c_upper_bound_published_values():
    assert an.mu_c_upper_bound_threshold(1.0, 2) == pytest.approx(0.843, abs=1e-3)
    assert an.mu_c_upper_bound(0.85, 1.0, 2) == pytest.approx(6.2001, abs=1e-3)
    # below the threshold the bound does not apply
    assert an.mu_c_upper_bound(0.8, 1.0, 2) is None
    # large-lambda limit: -log(1 - p_c)/a(d, 2r)
    limit = -math.log(0.5) / an.lattice_cell_area(2, 2.0)
    assert an.mu_c_upper_bound(1e9, 1.0, 2) == pytest.approx(limit, abs=1e-9)


def test_mu_c_upper_bound_monotone_in_lambda():
    vals = [an.mu_c_upper_bound(lam, 1.0, 2) for lam in np.linspace(0.85, 5, 30)]
    assert all(a >= b - 1e-12 for a, b in zip(vals, vals[1:]))


def test_word_condition():
    assert not an.word_condition([0.85, 0.85], [1.0, 1.0], 2)
    assert an.word_condition([3.0, 3.0], [1.0, 1.0], 2)
    assert not an.word_condition([1e-9, 3.0], [1.0, 1.0], 2)
    assert an.word_r0([1.0, 2.0, 1.5]) == 2.0
    with pytest.raises(ValueError):
        an.word_condition([1.0], [1.0, 1.0], 2)


def test_occupancy_open_probability_values():
    a = an.lattice_cell_area(2, 2.0)
    v = an.occupancy_open_probability([0.85, 0.85], 2.0, 2)
    assert v == pytest.approx((1 - math.exp(-0.85 * a)) ** 2)
    assert v == pytest.approx(0.253, abs=1e-3)
    v3 = an.occupancy_open_probability([3.0, 3.0], 2.0, 2)
    assert v3 == pytest.approx(0.838, abs=1e-3)


def test_marked_ab_condition():
    # threshold lambda* = -2 log(1 - sqrt(1/2)) / a(2, 2)
    thr = -2 * math.log(1 - math.sqrt(0.5)) / an.lattice_cell_area(2, 2.0)
    assert thr == pytest.approx(2.985, abs=1e-3)
    ok, interval = an.marked_ab_condition(3.0, 1.0, 2)
    assert ok
    p_lo, p_hi = interval
    assert p_lo < 0.5 < p_hi
    assert p_hi == pytest.approx(1 - p_lo, abs=1e-9)
    # interval endpoints solve the occupancy-product equation
    a = an.lattice_cell_area(2, 2.0)
    prod = (1 - math.exp(-3.0 * p_lo * a)) * (1 - math.exp(-3.0 * (1 - p_lo) * a))
    assert prod == pytest.approx(0.5, abs=1e-4)
    ok2, interval2 = an.marked_ab_condition(2.0, 1.0, 2)
    assert not ok2 and interval2 is None


def test_bound_ledger_dict():
    ledger = an.build_bound_ledger(0.85, 1.0, 2, lambda_c_r=1.4, lambda_c_2r=0.5)
    d = ledger.to_dict()
    assert d["inputs"]["lambda"] == 0.85
    names = [e["name"] for e in d["entries"]]
    assert names == ["mu_c_infinite", "mu_c_lower", "mu_c_upper",
                     "marked_ab_percolates"]
    upper = [e for e in d["entries"] if e["name"] == "mu_c_upper"][0]
    assert upper["applicable"] and abs(upper["value"] - 6.2001) < 1e-3


# ---------------------------------------------------------------------------
# site percolation
# ---------------------------------------------------------------------------

def test_site_percolation_trivial_p():
    spec = an.LatticeSpec.triangular(1.0, 32)
    assert not an.site_percolation_crossing(spec, 0.0, seed=1)
    assert an.site_percolation_crossing(spec, 1.0, seed=1)
    zspec = an.LatticeSpec.z_star(3, 1.0, 8)
    assert an.site_percolation_crossing(zspec, 1.0, seed=1)
    assert not an.site_percolation_crossing(zspec, 0.0, seed=1)


def test_site_percolation_monotone_coupling():
    # same seed draws the same uniform field, so crossings are monotone in p
    spec = an.LatticeSpec.triangular(1.0, 64)
    for seed in range(10):
        crossings = [an.site_percolation_crossing(spec, p, seed=[71, seed])
                     for p in (0.3, 0.45, 0.55, 0.7, 0.9)]
        assert all(a <= b for a, b in zip(crossings, crossings[1:]))


def test_site_percolation_straddle_smoke():
    spec = an.LatticeSpec.triangular(1.0, 64)
    lo = an.crossing_frequency(spec, 0.45, 80, master_seed=73)
    hi = an.crossing_frequency(spec, 0.55, 80, master_seed=73)
    assert lo < hi
    assert lo < 0.5 < hi


# ---------------------------------------------------------------------------
# occupancy coupling
# ---------------------------------------------------------------------------

def test_nearest_triangular_site_matches_brute_force():
    spec = an.LatticeSpec.triangular(1.0, 8)
    rng = np.random.default_rng(79)
    pts = rng.uniform(-2, 6, size=(300, 2))
    got = an._nearest_triangular_site(spec, pts)
    B = spec.basis()
    for (i, j), x in zip(got, pts):
        d_got = np.linalg.norm(x - B @ np.array([i, j]))
        for ii in range(i - 2, i + 3):
            for jj in range(j - 2, j + 3):
                assert d_got <= np.linalg.norm(x - B @ np.array([ii, jj])) + 1e-9


def test_occupancy_sites_empty_process():
    spec = an.LatticeSpec.for_word(2, 2.0)
    win = pp.Window.cube(10.0, 2)
    empty = pp.PointSet(window=win, intensity=0.0, points=np.empty((0, 2)))
    full = pp.sample_poisson(win, 3.0, seed=81)
    assert an.occupancy_sites([empty, full], spec) == set()


def test_occupancy_frequency_matches_void_probability():
    # single process: open fraction of interior sites ~ 1 - exp(-lambda a)
    lam, r0, L = 2.0, 2.0, 24.0
    spec = an.LatticeSpec.for_word(2, r0)
    win = pp.Window.cube(L, 2)
    interior = an.sites_within(spec, win, margin=2.0)
    hits = total = 0
    for k in range(12):
        ps = pp.sample_poisson(win, lam, seed=[83, k])
        open_sites = an.occupancy_sites([ps], spec)
        hits += len(open_sites & set(interior))
        total += len(interior)
    pred = 1 - math.exp(-lam * an.lattice_cell_area(2, r0))
    se = math.sqrt(pred * (1 - pred) / total)
    assert abs(hits / total - pred) <= 3 * se


def test_occupancy_cubes_product():
    lam, r0, L, d = 1.5, 2.0, 14.0, 3
    spec = an.LatticeSpec.for_word(d, r0)
    win = pp.Window.cube(L, d)
    interior = an.sites_within(spec, win)
    hits = total = 0
    for k in range(10):
        procs = [pp.sample_poisson(win, lam, seed=[87, k, i]) for i in range(2)]
        open_sites = an.occupancy_sites(procs, spec)
        hits += len(open_sites & set(interior))
        total += len(interior)
    pred = an.occupancy_open_probability([lam, lam], r0, d)
    se = math.sqrt(pred * (1 - pred) / total)
    assert abs(hits / total - pred) <= 3 * se


# ---------------------------------------------------------------------------
# word occurrence
# ---------------------------------------------------------------------------

def _proc(points, window):
    return pp.PointSet(window=window, intensity=1.0,
                       points=np.asarray(points, dtype=float))


def test_find_word_trivial_prefix():
    win = pp.Window.cube(10.0, 2)
    p1 = _proc([[1.0, 1.0]], win)
    p2 = _proc(np.empty((0, 2)), win)
    occ = an.find_word_occurrence([p1, p2], [1.0, 1.0], [1])
    assert occ.complete and len(occ) == 1
    occ2 = an.find_word_occurrence([p2, p1], [1.0, 1.0], [1])
    assert not occ2.complete and len(occ2) == 0


def test_find_word_boundary_distance():
    win = pp.Window.cube(10.0, 2)
    p1 = _proc([[1.0, 5.0]], win)
    p2 = _proc([[3.0, 5.0]], win)     # distance exactly r1 + r2 = 2
    occ = an.find_word_occurrence([p1, p2], [1.0, 1.0], [1, 2])
    assert occ.complete
    assert an.validate_word_occurrence(occ, [p1, p2], [1.0, 1.0])
    p2_far = _proc([[3.001, 5.0]], win)
    occ2 = an.find_word_occurrence([p1, p2_far], [1.0, 1.0], [1, 2])
    assert not occ2.complete and len(occ2) == 1


def test_find_word_distinctness():
    # word (1,2,1) with a single process-1 point cannot reuse it
    win = pp.Window.cube(10.0, 2)
    p1 = _proc([[5.0, 5.0]], win)
    p2 = _proc([[5.5, 5.0]], win)
    occ = an.find_word_occurrence([p1, p2], [1.0, 1.0], [1, 2, 1])
    assert not occ.complete and len(occ) == 2


def test_alternating_word_found_and_validates_as_ab_path():
    win = pp.Window.cube(30.0, 2)
    r = 1.0
    p1 = pp.sample_poisson(win, 2.0, seed=[91, 0])
    p2 = pp.sample_poisson(win, 2.0, seed=[91, 1])
    word = [1 + (i % 2) for i in range(12)]
    occ = an.find_word_occurrence([p1, p2], [r, r], word)
    assert occ.complete
    assert an.validate_word_occurrence(occ, [p1, p2], [r, r])
    assert an.word_occurrence_is_ab_path(occ, r)
    # cross-module equivalence: consecutive process-1 points of the
    # occurrence are adjacent in the planar witness graph
    w1 = pp.PointSet(window=win, intensity=2.0, points=p1.points)
    w2 = pp.PointSet(window=win, intensity=2.0, points=p2.points)
    g = ag.build_ab_continuum(w1, w2, r)
    edges = set(g.edge_list())
    vertex_ids = [idx for proc, idx in occ.indices if proc == 0]
    for a, b in zip(vertex_ids, vertex_ids[1:]):
        assert (min(a, b), max(a, b)) in edges


def test_validate_word_occurrence_rejects_tampering():
    win = pp.Window.cube(10.0, 2)
    p1 = _proc([[1.0, 5.0]], win)
    p2 = _proc([[2.5, 5.0]], win)
    occ = an.find_word_occurrence([p1, p2], [1.0, 1.0], [1, 2])
    occ.points = occ.points + 100.0
    assert not an.validate_word_occurrence(occ, [p1, p2], [1.0, 1.0])
