"""Analytic bound ledger, word-occurrence machinery, and the discrete
site-percolation lattices coupled to the continuum models.

The bound formulas use published lattice constants: the exact critical
probability 1/2 for site percolation on the triangular lattice, a
literature estimate for the Moore-neighbourhood cubic lattice, and the
4-decimal flower-area coefficient 0.8227.  geometry.cell_area evaluates
the flower area independently by quadrature and agrees to 4 decimals; the
published coefficient is kept here because the bound values quoted in the
literature are reproducible only at that precision (the upper bound on the
critical witness intensity moves by roughly 170 times any perturbation of
the area).
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from . import geometry
from .abgraph import build_tree

# critical site-percolation probabilities of the coupling lattices:
# d = 2 triangular (exact), d = 3 cubic lattice with Moore (l_inf = 1)
# adjacency (literature estimate); higher d must be caller-supplied.
PC_SITE = {2: 0.5, 3: 0.0976}

# published flower-area coefficient: area of the flower for edge parameter
# r = 2; a(2, r) = (r/2)^2 * A2_COEFF
A2_COEFF = 0.8227


def site_percolation_pc(d, override=None):
    """Critical probability p_c(d) of the coupling lattice."""
    if override is not None:
        return float(override)
    if d not in PC_SITE:
        raise ValueError(
            f"no tabulated p_c for d={d}; pass pc= explicitly (p_c(d) < 1)")
    return PC_SITE[d]


def lattice_cell_area(d, r):
    """Cell volume a(d, r) as used in the bound formulas: the published
    flower coefficient for d = 2, the exact cube volume for d >= 3."""
    if r <= 0:
        raise ValueError("r must be positive")
    if d == 2:
        return (r / 2.0) ** 2 * A2_COEFF
    return geometry.cell_area(d, r)


# ---------------------------------------------------------------------------
# bound ledger
# ---------------------------------------------------------------------------

@dataclass
class LedgerEntry:
    name: str
    value: float          # may be math.inf or None when inapplicable
    applicable: bool
    condition: str
    note: str = ""

    def to_dict(self):
        v = self.value
        if v is not None and math.isinf(v):
            v = "inf"
        return {"name": self.name, "value": v, "applicable": self.applicable,
                "condition": self.condition, "note": self.note}


def mu_c_lower_bounds(lam, r, lambda_c_r, lambda_c_2r):
    """Lower bounds on the critical witness intensity from caller-supplied
    estimates of the one-process critical intensities at radii r and 2r.

    Coupling facts behind them: a witness edge forces endpoint distance at
    most 4r, and any witnessed pair is linked through the witness in the
    superposed one-process model.
    """
    entries = []
    entries.append(LedgerEntry(
        name="mu_c_infinite",
        value=math.inf if lam < lambda_c_2r else None,
        applicable=lam < lambda_c_2r,
        condition="lambda < lambda_c(2r)",
        note="no percolation at any witness intensity"))
    in_band = lambda_c_2r < lam < lambda_c_r
    entries.append(LedgerEntry(
        name="mu_c_lower",
        value=max(0.0, lambda_c_r - lam) if lam >= lambda_c_2r else None,
        applicable=in_band,
        condition="lambda_c(2r) < lambda < lambda_c(r)",
        note="" if in_band else "vacuous outside the band"))
    return entries


def mu_c_upper_bound_threshold(r, d, pc=None):
    """Least lambda at which the upper bound applies:
    -log(1 - p_c(d)) / a(d, 2r)."""
    p = site_percolation_pc(d, pc)
    return -math.log(1.0 - p) / lattice_cell_area(d, 2.0 * r)


def mu_c_upper_bound(lam, r, d, pc=None):
    """Upper bound -(1/a) log(1 - p_c/(1 - e^(-lambda a))) with
    a = a(d, 2r), valid for lambda above mu_c_upper_bound_threshold.

    Returns None when the precondition fails (the bound is inapplicable,
    not zero)."""
    p = site_percolation_pc(d, pc)
    a = lattice_cell_area(d, 2.0 * r)
    denom = 1.0 - math.exp(-lam * a)
    if denom <= p:
        return None
    return -math.log(1.0 - p / denom) / a


def word_condition(lambdas, radii, d, pc=None):
    """Sufficient condition for every word to occur almost surely:
    prod_i (1 - e^(-lambda_i a(d, r0))) > p_c(d) with r0 = 2 min_i r_i."""
    lambdas = [float(v) for v in lambdas]
    radii = [float(v) for v in radii]
    if len(lambdas) != len(radii) or not lambdas:
        raise ValueError("need matching nonempty intensity and radius lists")
    if any(v <= 0 for v in lambdas) or any(v <= 0 for v in radii):
        raise ValueError("intensities and radii must be positive")
    return occupancy_open_probability(lambdas, word_r0(radii), d) \
        > site_percolation_pc(d, pc)


def word_r0(radii):
    """r0 = min over symbol pairs of (r_i + r_j) = 2 min_i r_i."""
    return 2.0 * min(float(v) for v in radii)


def occupancy_open_probability(lambdas, r0, d):
    """Probability that one lattice cell holds a point of every process:
    prod_i (1 - e^(-lambda_i a(d, r0)))."""
    a = lattice_cell_area(d, r0)
    out = 1.0
    for lam in lambdas:
        out *= 1.0 - math.exp(-lam * a)
    return out


def marked_ab_condition(lam, r, d, tol=1e-6, pc=None):
    """Threshold check for the single marked process: percolation of the
    A-vertex graph with B witnesses holds for all mark probabilities p in a
    symmetric interval around 1/2 once

        lambda > -2 log(1 - sqrt(p_c(d))) / a(d, 2r).

    Returns (condition holds, (p_low, p_high) or None); the interval ends
    are found by bisection of the occupancy product in p.
    """
    p_c = site_percolation_pc(d, pc)
    a = lattice_cell_area(d, 2.0 * r)
    threshold = -2.0 * math.log(1.0 - math.sqrt(p_c)) / a
    if lam <= threshold:
        return False, None

    def excess(p):
        return (1.0 - math.exp(-lam * p * a)) \
            * (1.0 - math.exp(-lam * (1.0 - p) * a)) - p_c

    # excess(1/2) > 0 by the threshold; excess(0+) = -p_c < 0; symmetric in p
    lo, hi = 0.0, 0.5
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0:
            hi = mid
        else:
            lo = mid
    p_low = 0.5 * (lo + hi)
    return True, (p_low, 1.0 - p_low)


@dataclass
class BoundLedger:
    """All analytic bounds for one parameter point, with applicability flags."""

    lam: float
    r: float
    d: int
    mu: float = None
    p: float = None
    lambda_c_r: float = None
    lambda_c_2r: float = None
    entries: list = field(default_factory=list)

    def to_dict(self):
        return {
            "inputs": {"lambda": self.lam, "mu": self.mu, "r": self.r,
                       "d": self.d, "p": self.p,
                       "lambda_c_r": self.lambda_c_r,
                       "lambda_c_2r": self.lambda_c_2r},
            "entries": [e.to_dict() for e in self.entries],
        }


def build_bound_ledger(lam, r, d, mu=None, p=None, lambda_c_r=None,
                       lambda_c_2r=None, pc=None):
    ledger = BoundLedger(lam=lam, r=r, d=d, mu=mu, p=p,
                         lambda_c_r=lambda_c_r, lambda_c_2r=lambda_c_2r)
    if lambda_c_r is not None and lambda_c_2r is not None:
        ledger.entries.extend(mu_c_lower_bounds(lam, r, lambda_c_r, lambda_c_2r))
    thr = mu_c_upper_bound_threshold(r, d, pc)
    ub = mu_c_upper_bound(lam, r, d, pc)
    ledger.entries.append(LedgerEntry(
        name="mu_c_upper", value=ub, applicable=ub is not None,
        condition=f"lambda > {thr:.6g}",
        note="" if ub is not None else "bound inapplicable at this lambda"))
    cond, interval = marked_ab_condition(lam, r, d, pc=pc)
    ledger.entries.append(LedgerEntry(
        name="marked_ab_percolates", value=None if interval is None else interval[0],
        applicable=cond,
        condition="lambda > -2 log(1 - sqrt(p_c)) / a(d, 2r)",
        note="value is p_low of the symmetric mark-probability interval"))
    return ledger


# ---------------------------------------------------------------------------
# site percolation on the coupling lattices
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LatticeSpec:
    """Finite site-percolation universe.

    kind "triangular": axial-coordinate rhombus, edge length `scale`,
    6-neighbour adjacency.  kind "z_star": hypercubic lattice with Moore
    (l_inf = 1) adjacency, spacing `scale`.
    """

    kind: str
    scale: float
    size: int = None          # sites per side; needed only for crossings
    d: int = 2

    def __post_init__(self):
        if self.kind not in ("triangular", "z_star"):
            raise ValueError(f"unknown lattice kind {self.kind!r}")
        if self.kind == "triangular" and self.d != 2:
            raise ValueError("triangular lattice is two-dimensional")
        if self.size is not None and self.size < 2:
            raise ValueError("lattice needs at least 2 sites per side")

    @classmethod
    def triangular(cls, scale, size=None):
        return cls(kind="triangular", scale=float(scale),
                   size=None if size is None else int(size), d=2)

    @classmethod
    def z_star(cls, d, scale, size=None):
        return cls(kind="z_star", scale=float(scale),
                   size=None if size is None else int(size), d=int(d))

    @classmethod
    def for_word(cls, d, r0, size=None):
        """The lattice the word construction uses: triangular with edge
        r0/2 in the plane, cubes of side r0/(2 sqrt(d)) otherwise."""
        if d == 2:
            return cls.triangular(r0 / 2.0, size)
        return cls.z_star(d, r0 / (2.0 * math.sqrt(d)), size)

    def basis(self):
        """Columns are the lattice basis vectors (triangular only)."""
        if self.kind != "triangular":
            raise ValueError("basis is defined for the triangular lattice")
        s = self.scale
        u1 = np.array([math.cos(math.pi / 6.0), math.sin(math.pi / 6.0)]) * s
        u2 = np.array([0.0, 1.0]) * s
        return np.stack([u1, u2], axis=1)

    def site_position(self, idx):
        if self.kind == "triangular":
            return self.basis() @ np.asarray(idx, dtype=float)
        return np.asarray(idx, dtype=float) * self.scale

    def adjacency_structure(self):
        if self.kind == "triangular":
            # axial offsets (+-1,0), (0,+-1), (1,-1), (-1,1)
            return np.array([[0, 1, 1], [1, 1, 1], [1, 1, 0]])
        return np.ones((3,) * self.d, dtype=int)


def site_percolation_crossing(spec, p, seed):
    """Open each site independently with probability p; is there an open
    crossing between the two opposite sides along axis 0?"""
    if not 0 <= p <= 1:
        raise ValueError("p must be in [0, 1]")
    if spec.size is None:
        raise ValueError("crossing needs a finite lattice (size not set)")
    rng = np.random.default_rng(seed)
    shape = (spec.size,) * (2 if spec.kind == "triangular" else spec.d)
    open_sites = rng.random(shape) < p
    return _crossing_of(open_sites, spec)


def _crossing_of(open_sites, spec):
    labels, _ = ndimage.label(open_sites, structure=spec.adjacency_structure())
    first = labels[0]
    last = labels[-1]
    lo = np.unique(first[first > 0])
    hi = np.unique(last[last > 0])
    return bool(np.intersect1d(lo, hi, assume_unique=True).size)


def crossing_frequency(spec, p, n_seeds, master_seed=0):
    hits = sum(site_percolation_crossing(spec, p, [master_seed, k])
               for k in range(n_seeds))
    return hits / n_seeds


# ---------------------------------------------------------------------------
# occupancy coupling: continuum points -> open lattice sites
# ---------------------------------------------------------------------------

def _nearest_triangular_site(spec, points):
    """Index (i, j) of the nearest lattice vertex for each point."""
    B = spec.basis()
    Binv = np.linalg.inv(B)
    frac = points @ Binv.T
    base = np.floor(frac).astype(int)
    best_d = np.full(len(points), np.inf)
    best_ij = np.zeros((len(points), 2), dtype=int)
    for di in (0, 1):
        for dj in (0, 1):
            ij = base + (di, dj)
            pos = ij @ B.T
            dist = ((points - pos) ** 2).sum(axis=1)
            better = dist < best_d
            best_d[better] = dist[better]
            best_ij[better] = ij[better]
    return best_ij


def occupancy_sites(processes, spec):
    """Open sites of the coupling lattice: a site is open iff its flower
    (triangular) or cube (z_star) holds at least one point of every
    process.  Returns a set of site index tuples."""
    if not processes:
        raise ValueError("need at least one process")
    open_set = None
    for ps in processes:
        pts = ps.points
        hit = set()
        if len(pts):
            if spec.kind == "triangular":
                r0 = 2.0 * spec.scale
                ij = _nearest_triangular_site(spec, pts)
                for (i, j), x in zip(ij, pts):
                    if (i, j) in hit:
                        continue
                    if geometry.flower_contains(x, spec.site_position((i, j)), r0):
                        hit.add((int(i), int(j)))
            else:
                # every point lies in exactly one cube
                idx = np.rint(pts / spec.scale).astype(int)
                hit = set(map(tuple, idx.tolist()))
        open_set = hit if open_set is None else (open_set & hit)
        if not open_set:
            return set()
    return open_set


def sites_within(spec, window, margin=None):
    """Site indices whose cell lies inside the window (margin defaults to
    one lattice spacing, enough to contain a flower or a cube)."""
    if margin is None:
        margin = spec.scale
    lo = np.asarray(window.lows) + margin
    hi = np.asarray(window.highs) - margin
    out = []
    if spec.kind == "triangular":
        B = spec.basis()
        corners = np.array([[lo[0], lo[1]], [lo[0], hi[1]],
                            [hi[0], lo[1]], [hi[0], hi[1]]])
        frac = corners @ np.linalg.inv(B).T
        imin, jmin = np.floor(frac.min(axis=0)).astype(int) - 1
        imax, jmax = np.ceil(frac.max(axis=0)).astype(int) + 1
        for i in range(imin, imax + 1):
            for j in range(jmin, jmax + 1):
                x = spec.site_position((i, j))
                if np.all(x >= lo) and np.all(x <= hi):
                    out.append((i, j))
    else:
        ranges = [range(int(math.ceil(l / spec.scale)),
                        int(math.floor(h / spec.scale)) + 1)
                  for l, h in zip(lo, hi)]
        def rec(prefix, rest):
            if not rest:
                out.append(tuple(prefix))
                return
            for v in rest[0]:
                rec(prefix + [v], rest[1:])
        rec([], ranges)
    return out


# ---------------------------------------------------------------------------
# word occurrence
# ---------------------------------------------------------------------------

@dataclass
class WordOccurrence:
    """Witness sequence for a word prefix: indices are (process, point id)
    pairs, one per realised symbol."""

    word: tuple               # symbols, 1-based process labels
    indices: list             # [(process index 0-based, point index), ...]
    points: np.ndarray        # realised points, one row per symbol
    complete: bool            # whole requested prefix realised
    budget_exhausted: bool = False

    def __len__(self):
        return len(self.indices)


def find_word_occurrence(processes, radii, word, node_budget=1_000_000):
    """Search for a sequence of distinct points realising the word prefix:
    the i-th point comes from process word[i] and consecutive points are
    within r_{w_i} + r_{w_{i+1}} (closed rule).

    Depth-first search over the layered candidate graph, never reusing a
    point; returns the longest realised prefix found (complete=True when
    the whole prefix is realised).  The node budget bounds the exhaustive
    backtracking on pathological near-critical instances.
    """
    word = tuple(int(w) for w in word)
    if not word:
        raise ValueError("word prefix must be nonempty")
    k = len(processes)
    if any(w < 1 or w > k for w in word):
        raise ValueError("word symbols must be 1..k")
    radii = [float(v) for v in radii]
    if len(radii) != k:
        raise ValueError("need one radius per process")
    trees = [build_tree(ps.points, ps.metric()) if len(ps) else None
             for ps in processes]
    pts = [ps.points for ps in processes]

    first = word[0] - 1
    if trees[first] is None:
        return WordOccurrence(word=word, indices=[], points=np.empty((0, processes[0].d)),
                              complete=False)

    best = []
    used = set()
    path = []
    budget = [int(node_budget)]

    def dfs(layer, proc, idx):
        nonlocal best
        path.append((proc, idx))
        if len(path) > len(best):
            best = list(path)
        if layer == len(word) - 1:
            return True
        if budget[0] <= 0:
            path.pop()
            return False
        budget[0] -= 1
        nxt = word[layer + 1] - 1
        if trees[nxt] is not None:
            reach = radii[proc] + radii[nxt]
            for j in trees[nxt].query_ball_point(pts[proc][idx], reach):
                key = (nxt, j)
                if key in used:
                    continue
                used.add(key)
                if dfs(layer + 1, nxt, j):
                    return True
                used.discard(key)
        path.pop()
        return False

    complete = False
    for start in range(len(pts[first])):
        used = {(first, start)}
        path = []
        if dfs(0, first, start):
            complete = True
            best = list(path)
            break
        if budget[0] <= 0:
            break
    occ_pts = np.array([pts[p][i] for p, i in best]) if best \
        else np.empty((0, processes[0].d))
    return WordOccurrence(word=word, indices=best, points=occ_pts,
                          complete=complete, budget_exhausted=budget[0] <= 0)


def validate_word_occurrence(occ, processes, radii):
    """Re-check an occurrence from scratch: point membership in the right
    process, distinctness, and every consecutive distance within the radius
    sum (closed rule)."""
    if len(occ.indices) != len(occ.points):
        return False
    seen = set()
    for step, (proc, idx) in enumerate(occ.indices):
        if occ.word[step] - 1 != proc:
            return False
        if (proc, idx) in seen:
            return False
        seen.add((proc, idx))
        if not np.allclose(processes[proc].points[idx], occ.points[step]):
            return False
    radii = [float(v) for v in radii]
    for a in range(len(occ.indices) - 1):
        pa, _ = occ.indices[a]
        pb, _ = occ.indices[a + 1]
        reach = radii[pa] + radii[pb]
        gap = float(np.linalg.norm(occ.points[a + 1] - occ.points[a]))
        if gap > reach + 1e-12:
            return False
    return True


def word_occurrence_is_ab_path(occ, r):
    """Re-validate an alternating-word occurrence (1,2,1,2,...) with equal
    radii r as a path of the planar witness graph: every even-position point
    certifies the edge between its neighbours, both within 2r of it."""
    w = occ.word
    if any(w[i] == w[i + 1] for i in range(len(w) - 1)) or set(w) - {1, 2}:
        raise ValueError("expected an alternating two-symbol word")
    pts = occ.points
    if len(pts) < 3:
        return len(pts) > 0
    for mid in range(1, len(pts) - 1, 2):
        d_prev = float(np.linalg.norm(pts[mid] - pts[mid - 1]))
        d_next = float(np.linalg.norm(pts[mid + 1] - pts[mid]))
        if d_prev > 2.0 * r + 1e-12 or d_next > 2.0 * r + 1e-12:
            return False
    return True
