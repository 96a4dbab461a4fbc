"""Seeded homogeneous Poisson sampling on boxes and tori, mark splitting,
Palm insertion, and a grid-based spatial index for radius queries.

Determinism contract: (seed, window, intensity) fully determines a sample,
bit for bit.  Per-replication streams are derived as seed sequences
(master_seed, replication_index, stream), so replications are
order-independent.
"""

import csv
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import Metric


@dataclass(frozen=True)
class Window:
    """Axis-aligned box [lows, highs]^d; `wrap` makes it a torus (equal sides)."""

    lows: tuple
    highs: tuple
    wrap: bool = False

    def __post_init__(self):
        lows = tuple(float(v) for v in self.lows)
        highs = tuple(float(v) for v in self.highs)
        object.__setattr__(self, "lows", lows)
        object.__setattr__(self, "highs", highs)
        if len(lows) != len(highs):
            raise ValueError("lows and highs must have equal length")
        if any(h <= l for l, h in zip(lows, highs)):
            raise ValueError("window must have positive extent on every axis")
        if self.wrap:
            sides = [h - l for l, h in zip(lows, highs)]
            if any(abs(s - sides[0]) > 1e-12 for s in sides):
                raise ValueError("toroidal window requires equal side lengths")

    @classmethod
    def unit_torus(cls, d=2):
        return cls(lows=(0.0,) * d, highs=(1.0,) * d, wrap=True)

    @classmethod
    def cube(cls, side, d=2, wrap=False):
        return cls(lows=(0.0,) * d, highs=(float(side),) * d, wrap=wrap)

    @property
    def d(self):
        return len(self.lows)

    @property
    def sides(self):
        return np.array(self.highs) - np.array(self.lows)

    @property
    def side(self):
        return float(self.sides[0])

    @property
    def volume(self):
        return float(np.prod(self.sides))

    def contains(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        lo = np.asarray(self.lows)
        hi = np.asarray(self.highs)
        return np.all((pts >= lo) & (pts <= hi), axis=1)

    def dilate(self, margin):
        """Box grown by `margin` on every face (witness sampling region)."""
        if self.wrap:
            raise ValueError("cannot dilate a toroidal window")
        return Window(
            lows=tuple(l - margin for l in self.lows),
            highs=tuple(h + margin for h in self.highs),
            wrap=False,
        )

    def metric(self):
        if self.wrap:
            return Metric("toroidal", self.side)
        return Metric("euclidean")


@dataclass(frozen=True)
class PointSet:
    """A sampled point pattern with its window, intensity and seed record."""

    window: Window
    intensity: float
    points: np.ndarray
    seed: tuple = None
    label: str = ""

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, self.window.d)
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.points)

    @property
    def d(self):
        return self.window.d

    def metric(self):
        return self.window.metric()


def _rng(seed):
    # accepts an int or a sequence; numpy seed sequences make derived
    # streams independent of each other
    return np.random.default_rng(seed)


def _seed_tuple(seed):
    if seed is None:
        return None
    if isinstance(seed, (int, np.integer)):
        return (int(seed),)
    return tuple(int(s) for s in seed)


def sample_poisson(window, intensity, seed):
    """Homogeneous Poisson sample: N ~ Poisson(intensity * volume), then N
    i.i.d. uniform points in the window.  Fully determined by the seed."""
    if intensity < 0:
        raise ValueError(f"intensity must be nonnegative, got {intensity}")
    rng = _rng(seed)
    n = int(rng.poisson(intensity * window.volume))
    lo = np.asarray(window.lows)
    pts = lo + rng.random((n, window.d)) * window.sides
    return PointSet(window=window, intensity=float(intensity), points=pts,
                    seed=_seed_tuple(seed))


def split_marks(ps, p, seed):
    """Independent thinning: each point goes to the first output with
    probability p.  The outputs partition the input and are themselves
    Poisson samples with intensities p*lambda and (1-p)*lambda."""
    if not 0 <= p <= 1:
        raise ValueError(f"p must be in [0, 1], got {p}")
    rng = _rng(seed)
    mask = rng.random(len(ps)) < p
    first = PointSet(window=ps.window, intensity=ps.intensity * p,
                     points=ps.points[mask], seed=_seed_tuple(seed),
                     label=ps.label + "/A")
    second = PointSet(window=ps.window, intensity=ps.intensity * (1 - p),
                      points=ps.points[~mask], seed=_seed_tuple(seed),
                      label=ps.label + "/B")
    return first, second


def palm_insert(ps, x):
    """Return ps with the point x appended (Palm version of the process)."""
    x = np.asarray(x, dtype=float).reshape(1, ps.d)
    if not ps.window.contains(x)[0]:
        raise ValueError("palm point lies outside the window")
    return replace(ps, points=np.vstack([ps.points, x]),
                   label=ps.label + "+palm")


# ---------------------------------------------------------------------------
# grid-based spatial index
# ---------------------------------------------------------------------------

@dataclass
class SpatialIndex:
    """Uniform-grid index over a point set for exact closed-ball queries.

    The cell size defaults to the expected query radius (a one-ring scan is
    then sufficient).  On a torus the cell count per axis divides the side
    and buckets wrap around.
    """

    points: np.ndarray
    metric: Metric
    cell: float
    lows: np.ndarray = field(default=None, repr=False)
    buckets: dict = field(default_factory=dict, repr=False)
    _ncells: int = field(default=0, repr=False)

    @classmethod
    def build(cls, ps, cell_size):
        """Index the points of a PointSet with the given target cell size."""
        if cell_size <= 0:
            raise ValueError("cell size must be positive")
        metric = ps.metric()
        lows = np.asarray(ps.window.lows, dtype=float)
        if metric.is_torus:
            ncells = max(1, int(math.floor(ps.window.side / cell_size)))
            cell = ps.window.side / ncells
        else:
            ncells = 0
            cell = float(cell_size)
        idx = cls(points=ps.points, metric=metric, cell=cell, lows=lows,
                  _ncells=ncells)
        keys = np.floor((ps.points - lows) / cell).astype(int)
        if metric.is_torus:
            keys %= ncells
        for i, key in enumerate(map(tuple, keys)):
            idx.buckets.setdefault(key, []).append(i)
        return idx

    def query(self, x, rho):
        """Ids of all indexed points within closed-ball distance rho of x."""
        if rho < 0:
            raise ValueError("query radius must be nonnegative")
        x = np.asarray(x, dtype=float)
        d = len(x)
        ring = int(math.ceil(rho / self.cell)) + 1
        base = np.floor((x - self.lows) / self.cell).astype(int)
        axes = []
        for k in range(d):
            rng = range(base[k] - ring, base[k] + ring + 1)
            if self.metric.is_torus:
                vals = sorted({v % self._ncells for v in rng})
            else:
                vals = list(rng)
            axes.append(vals)
        candidates = []
        for key in _product(axes):
            candidates.extend(self.buckets.get(key, ()))
        if not candidates:
            return np.empty(0, dtype=int)
        cand = np.asarray(sorted(set(candidates)), dtype=int)
        dist = self.metric.distances(self.points[cand], x)
        return cand[dist <= rho]


def _product(axes):
    if len(axes) == 1:
        for v in axes[0]:
            yield (v,)
        return
    for v in axes[0]:
        for rest in _product(axes[1:]):
            yield (v,) + rest


def range_query(index, x, rho):
    """Exactly the ids within distance rho of x under the index metric."""
    return index.query(x, rho)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def to_csv(ps, path):
    """Write `id,x1,...,xd` rows for every point."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id"] + [f"x{k + 1}" for k in range(ps.d)])
        for i, pt in enumerate(ps.points):
            w.writerow([i] + [repr(float(v)) for v in pt])


def load_csv(path, window, intensity=0.0):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    pts = np.array([[float(v) for v in row[1:]] for row in rows[1:]], dtype=float)
    return PointSet(window=window, intensity=intensity,
                    points=pts.reshape(-1, window.d))


def to_json_dict(ps):
    return {
        "window": {"lows": list(ps.window.lows), "highs": list(ps.window.highs),
                   "wrap": ps.window.wrap},
        "intensity": ps.intensity,
        "seed": list(ps.seed) if ps.seed is not None else None,
        "label": ps.label,
        "points": [[float(v) for v in pt] for pt in ps.points],
    }


def save_json(ps, path):
    with open(path, "w") as fh:
        json.dump(to_json_dict(ps), fh)


def from_json_dict(obj):
    win = Window(lows=tuple(obj["window"]["lows"]),
                 highs=tuple(obj["window"]["highs"]),
                 wrap=obj["window"]["wrap"])
    seed = tuple(obj["seed"]) if obj.get("seed") is not None else None
    return PointSet(window=win, intensity=obj["intensity"],
                    points=np.asarray(obj["points"], dtype=float).reshape(-1, win.d),
                    seed=seed, label=obj.get("label", ""))


def load_json(path):
    with open(path) as fh:
        return from_json_dict(json.load(fh))
