import math
import itertools

import numpy as np
import pytest

from abperc import geometry as G


# ---------------------------------------------------------------------------
# torus metric
# ---------------------------------------------------------------------------

def brute_torus_distance(x, y, side):
    """Oracle: minimum over all 3^d integer wrap offsets."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    d = len(x)
    best = math.inf
    for off in itertools.product((-side, 0.0, side), repeat=d):
        best = min(best, float(np.linalg.norm(x - y + np.asarray(off))))
    return best


def test_torus_distance_examples():
    assert G.torus_distance((0.1, 0.9), (0.9, 0.9)) == pytest.approx(0.2)
    assert G.torus_distance((0.3, 0.7), (0.3, 0.7)) == 0.0
    assert G.torus_distance((0.0, 0.0), (0.5, 0.5)) == pytest.approx(math.sqrt(0.5))


def test_torus_distance_matches_brute_force():
    rng = np.random.default_rng(0)
    for d in (2, 3):
        for _ in range(200):
            x = rng.random(d)
            y = rng.random(d)
            assert G.torus_distance(x, y) == pytest.approx(
                brute_torus_distance(x, y, 1.0), abs=1e-12)


def test_torus_distance_domain_error():
    with pytest.raises(ValueError):
        G.torus_distance((1.5, 0.0), (0.0, 0.0))


def test_metric_distances_vectorized():
    m = G.Metric("toroidal", 1.0)
    pts = np.array([[0.99, 0.5], [0.5, 0.5]])
    d = m.distances(pts, np.array([0.01, 0.5]))
    assert d[0] == pytest.approx(0.02)
    assert d[1] == pytest.approx(0.49)
    e = G.Metric()
    d2 = e.distances(pts, np.array([0.01, 0.5]))
    assert d2[0] == pytest.approx(0.98)


# ---------------------------------------------------------------------------
# ball volume and eta
# ---------------------------------------------------------------------------

def test_ball_volume():
    assert G.ball_volume(1) == pytest.approx(2.0)
    assert G.ball_volume(2) == pytest.approx(math.pi)
    assert G.ball_volume(3) == pytest.approx(4 * math.pi / 3)


def test_eta_trivials():
    for d in (2, 3, 4):
        assert G.eta(1.0, 0.0, d) == 1.0
        assert G.eta(2.5, 0.0, d) == 1.0
    assert G.eta(1.0, 4.0, 2) == 0.0            # cutoff s = 2^d u exactly
    assert G.eta(1.0, 8.0, 3) == 0.0
    with pytest.raises(ValueError):
        G.eta(0.0, 1.0, 2)
    with pytest.raises(ValueError):
        G.eta(1.0, -0.5, 2)


def test_eta_exact_d2_value():
    # unit circles at unit distance: lens fraction (2 phi - sin 2 phi)/pi,
    # phi = arccos(1/2) = pi/3
    phi = math.pi / 3
    expect = (2 * phi - math.sin(2 * phi)) / math.pi
    assert G.eta(1.0, 1.0, 2) == pytest.approx(expect, abs=1e-12)
    assert expect == pytest.approx(0.3910, abs=5e-5)


def test_eta_monte_carlo_agreement_small():
    # the acceptance suite runs the full 10^6-sample grid; a fast spot check
    est, se = G.eta_monte_carlo(1.0, 1.0, 3, samples=200_000, seed=5)
    assert abs(G.eta(1.0, 1.0, 3) - est) <= 3 * se


def test_eta_monte_carlo_deterministic():
    a = G.eta_monte_carlo(1.0, 2.0, 2, samples=10_000, seed=9)
    b = G.eta_monte_carlo(1.0, 2.0, 2, samples=10_000, seed=9)
    assert a == b


def test_eta_scale_invariance_and_monotone():
    rng = np.random.default_rng(1)
    for d in (2, 3):
        for _ in range(50):
            u = 0.2 + 4 * rng.random()
            s = rng.random() * (2 ** d) * u
            assert G.eta(u, s, d) == pytest.approx(G.eta(1.0, s / u, d), abs=1e-9)
        grid = np.linspace(0, 2 ** d, 40)
        vals = [G.eta(1.0, s, d) for s in grid]
        assert all(a >= b - 1e-12 for a, b in zip(vals, vals[1:]))
        assert vals[0] == 1.0 and vals[-1] == 0.0


def test_eta_lower_bound_grid():
    for d in (2, 3, 4):
        for s in np.linspace(0.0, 2 ** d, 100):
            assert G.eta(1.0, s, d) >= G.eta_lower_bound(1.0, s, d) - 1e-12
    assert G.eta_lower_bound(1.0, 0.0, 3) == 1.0
    assert G.eta_lower_bound(1.0, 1.0, 2) == pytest.approx(0.25)
    with pytest.raises(ValueError):
        G.eta_lower_bound(1.0, 5.0, 2)


# ---------------------------------------------------------------------------
# cutoff radius
# ---------------------------------------------------------------------------

def test_cutoff_radius():
    # direct high-precision evaluation of the formula
    expect = math.sqrt(math.log(100.0) / (100.0 * math.pi))
    assert G.cutoff_radius(100, 1.0, 1.0, 2) == pytest.approx(expect, abs=1e-15)
    assert expect == pytest.approx(0.121073, abs=1e-6)
    assert G.cutoff_radius(5, 1.0, 5.0, 2) == 0.0
    # doubling c halves r^d exactly
    r1 = G.cutoff_radius(1000, 1.0, 1.0, 3)
    r2 = G.cutoff_radius(1000, 2.0, 1.0, 3)
    assert r2 ** 3 == pytest.approx(r1 ** 3 / 2)
    with pytest.raises(ValueError):
        G.cutoff_radius(1, 1.0, 2.0, 2)
    with pytest.raises(ValueError):
        G.cutoff_radius(10, -1.0, 1.0, 2)


# ---------------------------------------------------------------------------
# alpha(c) and c0
# ---------------------------------------------------------------------------

def test_alpha_of_c():
    # c -> 0+: eta(a, c) -> 1 forces a -> 1
    assert G.alpha_of_c(1e-9, 2, tol=1e-7) == pytest.approx(1.0, abs=1e-4)
    a = G.alpha_of_c(1.0, 2, tol=1e-8)
    assert a == pytest.approx(1.8447098683, abs=1e-6)
    # root residual and the explicit upper bound
    assert a * G.eta(a, 1.0, 2) == pytest.approx(1.0, abs=1e-6)
    assert a <= G.alpha_upper_bound(1.0, 2) + 1e-12
    for c in (0.25, 0.5, 2.0, 5.0):
        for d in (2, 3):
            ac = G.alpha_of_c(c, d, tol=1e-7)
            assert ac <= G.alpha_upper_bound(c, d) + 1e-9
            assert ac * G.eta(ac, c, d) == pytest.approx(1.0, abs=1e-4)


def test_alpha_of_c_cross_checked_by_mc_oracle():
    a = G.alpha_of_c(1.0, 2, tol=1e-8)
    est, se = G.eta_monte_carlo(a, 1.0, 2, samples=400_000, seed=3)
    assert a * est == pytest.approx(1.0, abs=3 * a * se)


def test_alpha_upper_bound_values():
    assert G.alpha_upper_bound(0.0, 2) == 1.0
    assert G.alpha_upper_bound(1.0, 2) == pytest.approx(2.25)
    assert G.alpha_upper_bound(1.0, 3) == pytest.approx(3.375)


def test_c_zero():
    assert G.c_zero(3) == 1.0
    assert G.c_zero(5) == 1.0
    c0 = G.c_zero(2, tol=1e-8)
    assert 1.0 < c0 < 4.0
    assert c0 == pytest.approx(1.41055, abs=1e-4)
    assert G.eta(1.0, c0, 2) + 1.0 / c0 == pytest.approx(1.0, abs=1e-6)


# ---------------------------------------------------------------------------
# flower cell
# ---------------------------------------------------------------------------

def test_flower_contains_examples():
    assert G.flower_contains((0.0, 0.0), (0.0, 0.0), 2.0)
    # hand evaluation: distance to the midpoint (0, -0.5) is 1.08 > r/2 = 1
    assert math.dist((0.0, 0.58), (0.0, -0.5)) == pytest.approx(1.08)
    assert not G.flower_contains((0.0, 0.58), (0.0, 0.0), 2.0)


def test_flower_adjacent_diameter_property():
    # any x in flower(v), y in flower(v'): |x - y| <= r for adjacent v, v'
    rng = np.random.default_rng(4)
    r = 2.0
    v = np.zeros(2)
    samples = rng.uniform(-0.6, 0.6, size=(4000, 2))
    inside_v = samples[G.flower_contains(samples, v, r)]
    for nb in G.flower_neighbors(v, r):
        shifted = samples + nb
        inside_nb = shifted[G.flower_contains(shifted, nb, r)]
        if len(inside_v) and len(inside_nb):
            d = np.linalg.norm(inside_v[:, None, :] - inside_nb[None, :, :], axis=2)
            assert d.max() <= r + 1e-9


def test_flowers_disjoint():
    # flowers of distinct vertices never claim the same point
    rng = np.random.default_rng(6)
    r = 2.0
    verts = [np.zeros(2)] + [nb for nb in G.flower_neighbors((0.0, 0.0), r)]
    pts = rng.uniform(-1.5, 1.5, size=(5000, 2))
    owners = np.zeros(len(pts), dtype=int)
    for v in verts:
        owners += G.flower_contains(pts, v, r).astype(int)
    assert owners.max() <= 1


def test_cell_area():
    assert G.cell_area(2, 2.0) == pytest.approx(0.8227, abs=0.005)
    assert G.cell_area(3, 2 * math.sqrt(3)) == pytest.approx(1.0, abs=1e-12)
    # similarity scaling in the plane
    assert G.cell_area(2, 3.0) == pytest.approx(
        (3.0 / 2.0) ** 2 * G.cell_area(2, 2.0), abs=1e-12)
    with pytest.raises(ValueError):
        G.cell_area(2, 0.0)


def test_cell_area_matches_membership_mc_oracle():
    area, se = G.flower_area_monte_carlo(2.0, samples=400_000, seed=11)
    assert G.cell_area(2, 2.0) == pytest.approx(area, abs=3 * se)
