"""The four graph models: witness-based (AB) graphs on the torus and in the
plane, the marked one-process variant, and the plain distance-threshold
(Gilbert) graph.

An AB edge between two vertices requires a witness point of the second
process within the witness radius of both endpoints.  Components are built
by linking each witness's neighbour list sequentially, which yields the
same partition as materialising the clique at O(k) per witness; the
explicit edge list is optional and deduplicated.
"""

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph
from scipy.spatial import cKDTree

from .geometry import Metric


class UnionFind:
    """Disjoint sets with path compression and union by size."""

    def __init__(self, n):
        self.parent = list(range(n))
        self.size = [1] * n
        self.n_components = n

    def find(self, a):
        root = a
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[a] != root:
            self.parent[a], a = root, self.parent[a]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        self.n_components -= 1

    def labels(self):
        return np.array([self.find(i) for i in range(len(self.parent))])


def build_tree(points, metric):
    """KD-tree over the points; periodic boxes get the torus topology."""
    if metric.is_torus:
        return cKDTree(np.mod(points, metric.side), boxsize=metric.side)
    return cKDTree(points)


def neighbor_lists(points, centers, rho, metric):
    """For each center, the ids of `points` within closed-ball radius rho.

    KD-tree queries handle any radius on the torus; an explicit wrapped scan
    is kept as fallback for radii at the torus scale where sparse test
    configurations live.
    """
    if len(points) == 0 or len(centers) == 0:
        return [np.empty(0, dtype=np.int64) for _ in range(len(centers))]
    if metric.is_torus and rho >= 0.5 * metric.side * math.sqrt(points.shape[1]):
        return [np.flatnonzero(metric.distances(points, c) <= rho) for c in centers]
    tree = build_tree(points, metric)
    if metric.is_torus:
        centers = np.mod(centers, metric.side)
    lists = tree.query_ball_point(centers, rho)
    return [np.asarray(l, dtype=np.int64) for l in lists]


def _star_components(n, lists):
    """Component labels from sequential linking of each neighbour list."""
    us, vs = [], []
    for l in lists:
        if len(l) >= 2:
            us.append(np.full(len(l) - 1, l[0], dtype=np.int64))
            vs.append(l[1:])
    if n == 0:
        return np.empty(0, dtype=np.int64), 0
    if not us:
        return np.arange(n, dtype=np.int64), n
    u = np.concatenate(us)
    v = np.concatenate(vs)
    g = sparse.coo_matrix((np.ones(len(u), dtype=np.int8), (u, v)), shape=(n, n))
    ncomp, labels = csgraph.connected_components(g, directed=False)
    return labels, ncomp


@dataclass
class ABGraph:
    """Witness-based graph: vertices from one point set, edges certified by
    points of a second set within `witness_radius` of both endpoints."""

    vertices: object                  # PointSet (process 1)
    witnesses: object                 # PointSet (process 2)
    witness_radius: float
    metric: Metric
    labels: np.ndarray                # component id per vertex
    n_components: int
    non_isolated: np.ndarray          # bool per vertex
    witness_neighbor_ids: list = field(repr=False)
    _edges: set = field(default=None, repr=False)
    _adjacency: dict = field(default=None, repr=False)

    @property
    def n_vertices(self):
        return len(self.vertices)

    def components(self):
        """Component label per vertex (equal labels = same component)."""
        return self.labels

    def is_connected(self):
        # 0 or 1 vertex counts as connected
        return self.n_vertices <= 1 or self.n_components == 1

    def edge_list(self):
        """Deduplicated undirected edges as sorted (u, v) tuples."""
        if self._edges is None:
            edges = set()
            for l in self.witness_neighbor_ids:
                for a in range(len(l)):
                    for b in range(a + 1, len(l)):
                        u, v = int(l[a]), int(l[b])
                        edges.add((u, v) if u < v else (v, u))
            self._edges = edges
        return sorted(self._edges)

    def _adj(self):
        if self._adjacency is None:
            adj = {}
            for u, v in self.edge_list():
                adj.setdefault(u, set()).add(v)
                adj.setdefault(v, set()).add(u)
            self._adjacency = adj
        return self._adjacency

    def degree(self, v):
        """Number of distinct neighbours of vertex v."""
        return len(self._adj().get(int(v), ()))

    def verify_witnesses(self):
        """Re-check from scratch that every recorded edge has a witness
        within the witness radius of both endpoints."""
        pts = self.vertices.points
        wit = self.witnesses.points
        for u, v in self.edge_list():
            du = self.metric.distances(wit, pts[u])
            dv = self.metric.distances(wit, pts[v])
            if not np.any((du <= self.witness_radius) & (dv <= self.witness_radius)):
                return False
        return True

    def component_summary(self):
        """Component count and size histogram (JSON-friendly)."""
        sizes = np.bincount(self.labels, minlength=0) if self.n_vertices else np.array([], int)
        sizes = sizes[sizes > 0]
        hist = {}
        for s in sizes:
            hist[int(s)] = hist.get(int(s), 0) + 1
        return {"n_components": int(self.n_components),
                "size_histogram": {str(k): v for k, v in sorted(hist.items())}}


@dataclass
class GilbertGraph:
    """Distance-threshold graph: edge iff the distance is at most 2r."""

    points: object                    # PointSet
    ball_radius: float
    metric: Metric
    labels: np.ndarray
    n_components: int
    _edges: set = field(default=None, repr=False)

    @property
    def n_vertices(self):
        return len(self.points)

    def components(self):
        return self.labels

    def is_connected(self):
        return self.n_vertices <= 1 or self.n_components == 1

    def edge_list(self):
        if self._edges is None:
            pts = self.points.points
            tree = build_tree(pts, self.metric) if len(pts) else None
            edges = set()
            if tree is not None:
                for u, v in tree.query_pairs(2.0 * self.ball_radius):
                    edges.add((min(u, v), max(u, v)))
            self._edges = edges
        return sorted(self._edges)

    def degree(self, v):
        pts = self.points.points
        d = self.metric.distances(pts, pts[int(v)])
        return int(((d <= 2.0 * self.ball_radius)).sum()) - 1


def _ab_build(p1, p2, radius, metric):
    lists = neighbor_lists(p1.points, p2.points, radius, metric)
    n = len(p1)
    labels, ncomp = _star_components(n, lists)
    non_isolated = np.zeros(n, dtype=bool)
    for l in lists:
        if len(l) >= 2:
            non_isolated[l] = True
    return ABGraph(vertices=p1, witnesses=p2, witness_radius=radius,
                   metric=metric, labels=labels, n_components=ncomp,
                   non_isolated=non_isolated, witness_neighbor_ids=lists)


def build_ab_rgg(p1, p2, r, metric=None):
    """Witness graph on a shared (toroidal) window with witness radius r:
    edge iff some witness lies within r of both endpoints."""
    if p1.window != p2.window:
        raise ValueError("point sets must share a window")
    metric = metric or p1.metric()
    return _ab_build(p1, p2, float(r), metric)


def build_ab_continuum(p1, p2, r):
    """Planar witness graph with witness radius 2r (balls of radius 2r
    around vertices and witnesses), hence endpoint distance at most 4r.

    Witnesses are expected on a window containing the vertex window,
    normally the 2r-dilated box, so that boundary edges keep their
    witnesses.
    """
    if p1.window.wrap or p2.window.wrap:
        raise ValueError("continuum model uses Euclidean boxes")
    if (np.any(np.asarray(p2.window.lows) > np.asarray(p1.window.lows))
            or np.any(np.asarray(p2.window.highs) < np.asarray(p1.window.highs))):
        raise ValueError("witness window must contain the vertex window")
    return _ab_build(p1, p2, 2.0 * float(r), Metric("euclidean"))


def build_gilbert(ps, r, metric=None):
    """Gilbert graph: vertices connected iff their distance is <= 2r."""
    metric = metric or ps.metric()
    pts = ps.points
    n = len(pts)
    if n == 0:
        labels, ncomp = np.empty(0, dtype=np.int64), 0
    else:
        tree = build_tree(pts, metric)
        pairs = tree.query_pairs(2.0 * float(r), output_type="ndarray")
        if len(pairs):
            g = sparse.coo_matrix((np.ones(len(pairs), dtype=np.int8),
                                   (pairs[:, 0], pairs[:, 1])), shape=(n, n))
            ncomp, labels = csgraph.connected_components(g, directed=False)
        else:
            labels, ncomp = np.arange(n, dtype=np.int64), n
    return GilbertGraph(points=ps, ball_radius=float(r), metric=metric,
                        labels=labels, n_components=ncomp)


def build_marked_ab(phi, p, r, seed):
    """Marked model: split phi into marks A/B, vertices are the A points,
    witnesses the B points, witness radius 2r.  Degenerate p (0 or 1)
    yields an empty vertex or witness set."""
    if not 0 <= p <= 1:
        raise ValueError(f"p must be in [0, 1], got {p}")
    from .pointprocess import split_marks
    phi_a, phi_b = split_marks(phi, p, seed)
    if phi.window.wrap:
        g = _ab_build(phi_a, phi_b, 2.0 * float(r), phi.metric())
    else:
        g = _ab_build(phi_a, phi_b, 2.0 * float(r), Metric("euclidean"))
    return g


def components(g):
    """Component label per vertex."""
    return g.components()


def degree(g, v):
    """Deduplicated neighbour count of vertex v."""
    return g.degree(v)


def is_connected(g):
    """True iff the graph has at most one component (0 or 1 vertex counts
    as connected)."""
    return g.is_connected()


def edges_to_csv(g, path):
    """Edge list dump, one `u,v` row per undirected edge."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["u", "v"])
        for u, v in g.edge_list():
            w.writerow([u, v])


def component_summary_json(g, path=None):
    obj = g.component_summary()
    if path is not None:
        with open(path, "w") as fh:
            json.dump(obj, fh)
    return obj
