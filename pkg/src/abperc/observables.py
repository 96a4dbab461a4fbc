"""Observables of the witness-graph models: isolated-node counts, the
largest nearest-neighbour radius, the connectivity threshold, crossing
events and crossing-probability estimators, coverage vacancy, and the
total variation distance to a Poisson law.

Estimators are deterministic given (master_seed, replication_index) and
merge their per-replication records associatively.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .abgraph import build_ab_continuum, build_tree, neighbor_lists, _star_components
from .geometry import ball_volume, cutoff_radius
from .pointprocess import Window, sample_poisson


@dataclass
class IsolationReport:
    """Isolated-node counts of one joint sample at witness radius r.

    W        isolated vertices (degree zero) of the witness graph
    W_tilde  vertices with no witness within r            (lower bound)
    W_bar    witnesses with exactly one vertex within r   (slack term)
    W_hat    vertices with no other vertex within 2r      (2r-isolation)
    W0       witnesses with no vertex within r
    Satisfies W_tilde <= W <= W_tilde + W_bar and W_hat <= W per sample.
    """

    W: int
    W_tilde: int
    W_bar: int
    W_hat: int
    W0: int
    r: float
    n1: int = 0
    n2: int = 0


def count_isolated(g):
    """Number of degree-zero vertices of a witness graph."""
    return int((~g.non_isolated).sum())


def auxiliary_counts(p1, p2, r):
    """IsolationReport of the pair (p1, p2) at witness radius r.

    A vertex is non-isolated iff some witness within r of it has at least
    one other vertex within r, so W needs only per-witness neighbour counts
    and a nearest-good-witness query.
    """
    if p1.window != p2.window:
        raise ValueError("point sets must share a window")
    r = float(r)
    metric = p1.metric()
    n1, n2 = len(p1), len(p2)
    if n1 == 0:
        return IsolationReport(W=0, W_tilde=0, W_bar=0, W_hat=0, W0=n2,
                               r=r, n1=0, n2=n2)
    if n2 == 0:
        return IsolationReport(W=n1, W_tilde=n1, W_bar=0, W_hat=_w_hat(p1, 2 * r),
                               W0=0, r=r, n1=n1, n2=0)
    t1 = build_tree(p1.points, metric)
    t2 = build_tree(p2.points, metric)
    q2 = np.mod(p2.points, metric.side) if metric.is_torus else p2.points
    q1 = np.mod(p1.points, metric.side) if metric.is_torus else p1.points
    cnt = t1.query_ball_point(q2, r, return_length=True)
    w0 = int((cnt == 0).sum())
    w_bar = int((cnt == 1).sum())
    good = p2.points[cnt >= 2]
    if len(good):
        dg, _ = build_tree(good, metric).query(q1, k=1)
        w = int((dg > r).sum())
    else:
        w = n1
    d_nearest_witness, _ = t2.query(q1, k=1)
    w_tilde = int((d_nearest_witness > r).sum())
    return IsolationReport(W=w, W_tilde=w_tilde, W_bar=w_bar,
                           W_hat=_w_hat(p1, 2 * r), W0=w0, r=r, n1=n1, n2=n2)


def _w_hat(p1, rho):
    """Vertices with no other vertex within rho."""
    if len(p1) < 2:
        return len(p1)
    metric = p1.metric()
    t1 = build_tree(p1.points, metric)
    q1 = np.mod(p1.points, metric.side) if metric.is_torus else p1.points
    d2, _ = t1.query(q1, k=2)
    return int((d2[:, 1] > rho).sum())


def largest_nn_radius(p1, p2):
    """Exact largest nearest-neighbour radius:

        M = max over vertices X of  min over witnesses Y of
            max( d(X, Y), min over other vertices X' of d(Y, X') ).

    X gains an edge at radius r iff r >= its inner min-max value, so M is
    the smallest radius at which no vertex is isolated.  Candidate pruning
    (cheap upper bounds from the nearest witness) keeps this exact while
    touching only a handful of vertices.
    """
    n1, n2 = len(p1), len(p2)
    if n1 == 0 or n2 == 0:
        raise ValueError("largest_nn_radius needs nonempty vertex and witness sets")
    if n1 == 1:
        return math.inf     # a single vertex can never gain a neighbour
    metric = p1.metric()
    t1 = build_tree(p1.points, metric)
    t2 = build_tree(p2.points, metric)
    q1 = np.mod(p1.points, metric.side) if metric.is_torus else p1.points
    q2 = np.mod(p2.points, metric.side) if metric.is_torus else p2.points
    d_xy, idx = t2.query(q1, k=1)    # nearest witness per vertex
    dm, am = t1.query(q2, k=2)       # two nearest vertices per witness (n1 >= 2)
    m1, m2, a1 = dm[:, 0], dm[:, 1], am[:, 0]

    def min_other(cand_ids, xi):
        return np.where(a1[cand_ids] == xi, m2[cand_ids], m1[cand_ids])

    upper = np.maximum(d_xy, min_other(idx, np.arange(n1)))
    best = float(d_xy.max())         # lower bound: some vertex has every
                                     # witness at least this far
    for xi in np.argsort(-upper):
        if upper[xi] <= best:
            break
        cand = t2.query_ball_point(q1[xi], upper[xi])
        cand = np.asarray(cand, dtype=int)
        d_to_wit = metric.distances(p2.points[cand], p1.points[xi])
        iso = float(np.maximum(d_to_wit, min_other(cand, xi)).min())
        if iso > best:
            best = iso
    return best


def connectivity_threshold(p1, p2, c, tol=1e-3):
    """alpha* = inf{a : the witness graph at radius a^(1/d) r_n(c) is
    connected}, by bisection on a.

    The bracket starts at the exact lower bound (M_n / r_n(c))^d given by
    the last isolated vertex, so the returned midpoint never undercuts it.
    Degenerate samples (at most one vertex) give 0; an empty witness set
    with two or more vertices gives +inf.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    n1 = len(p1)
    if n1 <= 1:
        return 0.0
    if len(p2) == 0:
        return math.inf
    d = p1.d
    metric = p1.metric()
    r_c = cutoff_radius(p1.intensity, c, 1.0, d)

    def connected_at(a):
        rho = a ** (1.0 / d) * r_c
        lists = neighbor_lists(p1.points, p2.points, rho, metric)
        _, ncomp = _star_components(n1, lists)
        return ncomp == 1

    lo = (largest_nn_radius(p1, p2) / r_c) ** d
    if connected_at(lo):
        return lo
    hi = 2.0 * max(lo, 1.0)
    # on the torus the graph is surely connected once the radius reaches the
    # diameter, so the doubling terminates
    while not connected_at(hi):
        hi *= 2.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if connected_at(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# crossing events and crossing-probability estimators
# ---------------------------------------------------------------------------

@dataclass
class CrossingReport:
    crossed: bool
    axis: int
    component: int = None     # a component label realising the crossing


def crossing_exists(g, axis=0):
    """Does one component of g touch both opposite faces of its window?

    A vertex "touches" a face when it lies within the witness radius of it
    (2r for the planar model, r for the torus-window model).
    """
    win = g.vertices.window
    pts = g.vertices.points
    if len(pts) == 0:
        return CrossingReport(crossed=False, axis=axis)
    reach = g.witness_radius
    lo_face = win.lows[axis] + reach
    hi_face = win.highs[axis] - reach
    lo_labels = set(g.labels[pts[:, axis] <= lo_face].tolist())
    hi_labels = set(g.labels[pts[:, axis] >= hi_face].tolist())
    common = lo_labels & hi_labels
    if common:
        return CrossingReport(crossed=True, axis=axis, component=int(min(common)))
    return CrossingReport(crossed=False, axis=axis)


def wilson_interval(successes, trials, z=1.96):
    """Wilson 95% (default) score interval for a binomial proportion."""
    if trials == 0:
        return 0.0, 1.0
    p = successes / trials
    den = 1 + z * z / trials
    mid = (p + z * z / (2 * trials)) / den
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / den
    return max(0.0, mid - half), min(1.0, mid + half)


@dataclass
class ThetaEstimate:
    prob: float
    ci_low: float
    ci_high: float
    crossings: int
    reps: int
    lam: float
    mu: float
    r: float
    L: float


def _seed_list(seed):
    if isinstance(seed, (int, np.integer)):
        return [int(seed)]
    return [int(s) for s in seed]


def estimate_theta(lam, mu, r, L, d=2, reps=200, master_seed=0, axis=0):
    """Crossing probability of the planar witness graph on [0, L]^d as a
    finite-size proxy for the percolation probability, with a Wilson 95%
    interval.  Witnesses are sampled on the 2r-dilated box."""
    if reps < 1:
        raise ValueError("reps must be >= 1")
    win = Window.cube(L, d)
    wit_win = win.dilate(2.0 * r)
    base = _seed_list(master_seed)
    crossings = 0
    for rep in range(reps):
        p1 = sample_poisson(win, lam, base + [rep, 0])
        p2 = sample_poisson(wit_win, mu, base + [rep, 1])
        g = build_ab_continuum(p1, p2, r)
        crossings += bool(crossing_exists(g, axis=axis).crossed)
    prob = crossings / reps
    lo, hi = wilson_interval(crossings, reps)
    return ThetaEstimate(prob=prob, ci_low=lo, ci_high=hi, crossings=crossings,
                         reps=reps, lam=lam, mu=mu, r=r, L=L)


@dataclass
class MuCEstimate:
    mu_hat: float
    bracket_low: float
    bracket_high: float
    status: str          # "ok" | "no-percolation-detected"
    probes: list
    target: float

    @property
    def ci(self):
        return self.bracket_low, self.bracket_high


def estimate_mu_c(lam, r, L, target=0.5, tol=0.1, reps=100, master_seed=0,
                  d=2, mu_max=1024.0):
    """Finite-size estimate of the critical witness intensity: the mu at
    which the crossing probability reaches `target`, by stochastic
    bisection with a fixed replication budget per probe.

    This is a finite-size proxy, not the true critical intensity.  If no
    percolation is detected up to mu_max the result says so explicitly.
    """
    if not 0 < target < 1:
        raise ValueError("target must be in (0, 1)")
    if tol <= 0:
        raise ValueError("tol must be positive")
    probes = []

    def probe(mu, k):
        est = estimate_theta(lam, mu, r, L, d=d, reps=reps,
                             master_seed=[master_seed, k])
        probes.append(est)
        return est.prob

    lo, hi = 0.0, 1.0
    k = 0
    while probe(hi, k) < target:
        lo, hi = hi, hi * 2.0
        k += 1
        if hi > mu_max:
            return MuCEstimate(mu_hat=math.inf, bracket_low=lo, bracket_high=math.inf,
                               status="no-percolation-detected", probes=probes,
                               target=target)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        k += 1
        if probe(mid, k) >= target:
            hi = mid
        else:
            lo = mid
    return MuCEstimate(mu_hat=0.5 * (lo + hi), bracket_low=lo, bracket_high=hi,
                       status="ok", probes=probes, target=target)


# ---------------------------------------------------------------------------
# coverage vacancy (d = 2)
# ---------------------------------------------------------------------------

def vacancy_positive(p1, r, center=None):
    """Is part of the r-ball at `center` left uncovered by the union of
    r-balls around the points of p1 (planar torus, d = 2)?

    Decided exactly (up to probability-zero ties) by the crossing-point
    criterion: vacancy is positive iff the centre itself is uncovered, or
    some intersection point of two covering circles inside the ball, or of
    a covering circle with the ball boundary, lies in the open interior of
    no other covering ball.
    """
    if p1.d != 2:
        raise ValueError("vacancy check supports d = 2 only")
    r = float(r)
    if center is None:
        center = np.zeros(2)
    center = np.asarray(center, dtype=float)
    metric = p1.metric()
    if metric.is_torus:
        half = metric.side / 2.0
        disp = (p1.points - center + half) % metric.side - half
    else:
        disp = p1.points - center
    dist0 = np.linalg.norm(disp, axis=1)
    rel = disp[dist0 <= 2.0 * r]
    if len(rel) == 0:
        return True
    dists = np.linalg.norm(rel, axis=1)
    if dists.min() > r:
        return True                   # centre uncovered
    test_points = []
    generators = []

    def circle_crossings(c0, c1):
        dv = c1 - c0
        t = float(np.linalg.norm(dv))
        if t <= 0.0 or t >= 2.0 * r:
            return ()
        mid = c0 + dv / 2.0
        h = math.sqrt(max(r * r - t * t / 4.0, 0.0))
        perp = np.array([-dv[1], dv[0]]) / t
        return (mid + h * perp, mid - h * perp)

    origin = np.zeros(2)
    nrel = len(rel)
    for i in range(nrel):
        for p in circle_crossings(origin, rel[i]):
            test_points.append(p)     # covering circle meets the ball boundary
            generators.append((i,))
    for i in range(nrel):
        for j in range(i + 1, nrel):
            for p in circle_crossings(rel[i], rel[j]):
                if p @ p <= r * r:    # crossing inside the target ball
                    test_points.append(p)
                    generators.append((i, j))
    for p, gen in zip(test_points, generators):
        d = np.linalg.norm(rel - p, axis=1)
        d[list(gen)] = np.inf
        if d.min() >= r:              # not interior to any other ball
            return True
    return False


def vacancy_bound(n, r):
    """Closed-form bound on P(vacancy > 0) for the planar coverage process:
    (1 + n pi r^2 + 4 (n pi r^2)^2) exp(-n pi r^2)."""
    x = n * math.pi * r * r
    return (1.0 + x + 4.0 * x * x) * math.exp(-x)


# ---------------------------------------------------------------------------
# distributional distance and exact expectations
# ---------------------------------------------------------------------------

def dtv_poisson(samples, beta):
    """Total variation distance between the empirical law of integer samples
    and Poisson(beta): half the l1 distance, with the analytic tail beyond
    the largest observation."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    samples = np.asarray(samples, dtype=int)
    if samples.size == 0:
        raise ValueError("need at least one sample")
    kmax = int(samples.max())
    ks = np.arange(kmax + 1)
    emp = np.bincount(samples, minlength=kmax + 1) / samples.size
    pmf = stats.poisson.pmf(ks, beta)
    return float(0.5 * (np.abs(emp - pmf).sum() + stats.poisson.sf(kmax, beta)))


def palm_w0_mean(n, c, r, d=2):
    """Exact expectation of W0 (witnesses with no vertex within r) on the
    torus: c n exp(-n theta_d r^d), from the Palm formula."""
    return c * n * math.exp(-n * ball_volume(d) * r ** d)
