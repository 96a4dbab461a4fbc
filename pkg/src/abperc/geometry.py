"""Closed-form geometric quantities for witness-based geometric graphs.

Everything here is a pure function of its inputs: ball volumes, the
normalised lens volume eta of two equal balls, the connectivity constant
alpha(c), the mean-stabilising constant c0, the cut-off radius sequence
r_n(c, beta), and the triangular-lattice "flower" cell used by the
discrete coupling.  Monte Carlo oracles (explicit seed, deterministic)
are provided alongside the closed forms so each can validate the other.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate


def ball_volume(d):
    """Volume of the d-dimensional unit ball, pi^(d/2) / Gamma(d/2 + 1)."""
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------

def torus_distance(x, y, side=1.0):
    """Toroidal distance on [0, side]^d: min over integer wraps of |x - y + z*side|.

    Coordinates outside the cube are a domain error.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x < 0) or np.any(x > side) or np.any(y < 0) or np.any(y > side):
        raise ValueError("points must lie in [0, side]^d")
    delta = np.abs(x - y)
    delta = np.minimum(delta, side - delta)
    return float(np.sqrt((delta ** 2).sum()))


@dataclass(frozen=True)
class Metric:
    """Euclidean or toroidal metric; `side` is used only on the torus."""

    kind: str = "euclidean"      # "euclidean" | "toroidal"
    side: float = 1.0

    def __post_init__(self):
        if self.kind not in ("euclidean", "toroidal"):
            raise ValueError(f"unknown metric kind {self.kind!r}")

    @property
    def is_torus(self):
        return self.kind == "toroidal"

    def distance(self, x, y):
        if self.is_torus:
            return torus_distance(x, y, self.side)
        return float(np.linalg.norm(np.asarray(x, float) - np.asarray(y, float)))

    def distances(self, points, x):
        """Vectorised distances from every row of `points` to the point `x`."""
        points = np.asarray(points, dtype=float)
        x = np.asarray(x, dtype=float)
        if self.is_torus:
            half = self.side / 2.0
            delta = (points - x + half) % self.side - half
            return np.sqrt((delta ** 2).sum(axis=1))
        return np.linalg.norm(points - x, axis=1)


# ---------------------------------------------------------------------------
# lens volume eta and its relatives
# ---------------------------------------------------------------------------

def eta(u, s, d):
    """Normalised lens volume of two balls of radius u^(1/d) whose centres
    are s^(1/d) apart: vol(intersection) / (theta_d * u).

    By scaling, eta(u, s) = eta(1, s/u).  Equals 1 at s = 0 and 0 as soon as
    s >= 2^d * u (centre distance at least two radii).  d = 2 uses the exact
    circular-segment formula; d >= 3 integrates the spherical-cap profile
    (1 - t^2/4)^((d-1)/2), which reproduces the circular case at d = 2 and
    matches the Monte Carlo oracle in every dimension.
    """
    if u <= 0:
        raise ValueError(f"u must be positive, got {u}")
    if s < 0:
        raise ValueError(f"s must be nonnegative, got {s}")
    if s == 0:
        return 1.0
    ratio = s / u
    if ratio >= 2 ** d:
        return 0.0
    if d == 2:
        # lens area over pi r^2 with half-angle phi = arccos(D / 2R)
        phi = math.acos(math.sqrt(ratio) / 2.0)
        return (2 * phi - math.sin(2 * phi)) / math.pi
    upper = ratio ** (1.0 / d)
    val, _ = integrate.quad(
        lambda t: (1 - t * t / 4.0) ** ((d - 1) / 2.0), 0.0, upper,
        epsabs=1e-10, epsrel=1e-12,
    )
    return 1.0 - ball_volume(d - 1) / ball_volume(d) * val


def eta_lower_bound(u, s, d):
    """(1 - (s/u)^(1/d) / 2)^d, the inscribed-ball bound on eta(u, s)."""
    if u <= 0:
        raise ValueError(f"u must be positive, got {u}")
    if s < 0 or s > 2 ** d * u:
        raise ValueError("need 0 <= s <= 2^d * u")
    return (1.0 - 0.5 * (s / u) ** (1.0 / d)) ** d


def eta_monte_carlo(u, s, d, samples=1_000_000, seed=0):
    """Monte Carlo oracle for eta(u, s, d).

    Samples points uniformly in one ball and returns (fraction inside the
    other ball, binomial standard error).  Deterministic given the seed.
    """
    if u <= 0:
        raise ValueError(f"u must be positive, got {u}")
    rng = np.random.default_rng(seed)
    radius = u ** (1.0 / d)
    dist = s ** (1.0 / d)
    g = rng.standard_normal((samples, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    pts = g * (radius * rng.random(samples) ** (1.0 / d))[:, None]
    pts[:, 0] -= dist
    p = float(((pts ** 2).sum(axis=1) <= radius * radius).mean())
    se = math.sqrt(p * (1.0 - p) / samples)
    return p, se


def cutoff_radius(n, c, beta, d):
    """Cut-off radius r_n(c, beta) = (log(n/beta) / (c n theta_d))^(1/d).

    n = beta returns 0; n < beta is a domain error (negative logarithm).
    """
    if beta <= 0 or c <= 0:
        raise ValueError("need beta > 0 and c > 0")
    if n < beta:
        raise ValueError(f"need n >= beta, got n={n}, beta={beta}")
    if n == beta:
        return 0.0
    return (math.log(n / beta) / (c * n * ball_volume(d))) ** (1.0 / d)


def alpha_upper_bound(c, d):
    """(1 + c^(1/d)/2)^d, an explicit upper bound for alpha_of_c."""
    if c < 0:
        raise ValueError(f"c must be nonnegative, got {c}")
    return (1.0 + 0.5 * c ** (1.0 / d)) ** d


def alpha_of_c(c, d, tol=1e-6):
    """alpha(c) = inf{a : a * eta(a, c) > 1}, found by bisection.

    a * eta(a, c) is 0 for a <= c/2^d, strictly increasing beyond, and grows
    without bound, so a bracket always exists.  The result never exceeds
    alpha_upper_bound(c, d).
    """
    if c <= 0 or tol <= 0:
        raise ValueError("need c > 0 and tol > 0")
    f = lambda a: a * eta(a, c, d) - 1.0
    lo = max(1.0, c / 2 ** d)
    if f(lo) > 0:
        return lo
    hi = 2.0 * max(lo, 1.0)
    while f(hi) <= 0:
        hi *= 2.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def c_zero(d, tol=1e-6):
    """c0 = sup{c : eta(1, c) + 1/c > 1} for d = 2 (lies in (1, 4));
    exactly 1 for d >= 3."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    if d >= 3:
        return 1.0
    if d != 2:
        raise ValueError(f"dimension must be >= 2, got {d}")
    g = lambda c: eta(1.0, c, 2) + 1.0 / c - 1.0
    lo, hi = 1.0, 4.0     # g(1) = eta(1) > 0, g(4) = -3/4 < 0, g decreasing
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# triangular-lattice flower cell
# ---------------------------------------------------------------------------

# Edge directions of the triangular lattice used throughout: one edge points
# straight up, so neighbours sit at angles 30 + 60k degrees.
_FLOWER_ANGLES = np.deg2rad(30.0 + 60.0 * np.arange(6))
_FLOWER_DIRS = np.stack([np.cos(_FLOWER_ANGLES), np.sin(_FLOWER_ANGLES)], axis=1)


def flower_midpoints(vertex, r):
    """Midpoints of the six lattice edges (length r/2) incident to `vertex`."""
    return np.asarray(vertex, float) + (r / 4.0) * _FLOWER_DIRS


def flower_neighbors(vertex, r):
    """The six lattice neighbours of `vertex` at distance r/2."""
    return np.asarray(vertex, float) + (r / 2.0) * _FLOWER_DIRS


def flower_contains(x, vertex, r):
    """Membership test for the flower cell of a triangular-lattice vertex.

    A point belongs to the flower iff it lies in the Voronoi cell of the
    vertex and within r/2 of all six midpoints of the incident edges.  The
    flowers of distinct vertices are disjoint, and any two points in the
    flowers of adjacent vertices are within r of each other (both lie within
    r/2 of the shared edge midpoint).

    `x` may be a single point or an (N, 2) array; returns bool or bool array.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    vertex = np.asarray(vertex, dtype=float)
    d_self = ((x - vertex) ** 2).sum(axis=1)
    ok = np.ones(len(x), dtype=bool)
    for nb in flower_neighbors(vertex, r):
        ok &= d_self <= ((x - nb) ** 2).sum(axis=1)
    lim = (r / 2.0) ** 2
    for m in flower_midpoints(vertex, r):
        ok &= ((x - m) ** 2).sum(axis=1) <= lim
    return ok if ok.size > 1 else bool(ok[0])


def cell_area(d, r):
    """Cell volume a(d, r) of the discrete coupling lattice.

    d >= 3: cubes of side r/(2 sqrt(d)), so a = (r/(2 sqrt(d)))^d exactly.
    d = 2: area of the flower, computed by quadrature.  In polar coordinates
    around the vertex the flower boundary at angle psi from the nearest edge
    direction solves rho^2 + rho cos(psi) + 1/4 = 1 (unit scale r = 2, the
    binding constraint being the opposite edge midpoint), so

        a(2, 2) = 6 * int_0^{pi/6} rho(psi)^2 dpsi,
        rho(psi) = (-cos(psi) + sqrt(cos(psi)^2 + 3)) / 2,

    and a(2, r) = (r/2)^2 * a(2, 2) by similarity.
    """
    if r <= 0:
        raise ValueError(f"r must be positive, got {r}")
    if d >= 3:
        return (r / (2.0 * math.sqrt(d))) ** d
    if d != 2:
        raise ValueError(f"dimension must be >= 2, got {d}")

    def rho_sq(psi):
        cc = math.cos(psi)
        rho = 0.5 * (-cc + math.sqrt(cc * cc + 3.0))
        return rho * rho

    val, _ = integrate.quad(rho_sq, 0.0, math.pi / 6.0, epsabs=1e-12, epsrel=1e-12)
    return 6.0 * val * (r / 2.0) ** 2


def flower_area_monte_carlo(r, samples=1_000_000, seed=0):
    """Monte Carlo oracle for cell_area(2, r): rejection over flower_contains."""
    rng = np.random.default_rng(seed)
    box = 0.30 * r   # flower fits inside radius ~0.268 r
    pts = rng.uniform(-box, box, size=(samples, 2))
    frac = float(np.mean(flower_contains(pts, (0.0, 0.0), r)))
    area = frac * (2 * box) ** 2
    se = (2 * box) ** 2 * math.sqrt(frac * (1 - frac) / samples)
    return area, se
