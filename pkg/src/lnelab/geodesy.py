"""Inner metric approximation on sample clouds.

A proximity graph with Euclidean edge weights stands in for the set: shortest
path lengths approximate the inner (path) metric and the ratio to the chord
length gives the Lipschitz normal embedding constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components, dijkstra
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist

from .variety import Constraint, SampleCloud

__all__ = [
    "ConnectionRule",
    "GeodesicGraph",
    "LneEstimate",
    "ComponentPartition",
    "StabilityReport",
    "build_graph",
    "prune_shortcuts",
    "inner_distance",
    "components",
    "lne_constant",
    "two_scale_validate",
    "median_spacing",
    "graph_resolution",
    "CloudGerm",
]

DEFAULT_PAIR_BUDGET = 4_000_000
DEFAULT_RADIUS_FACTOR = 3.0
UNSTABLE_FACTOR = 1.5


def _points_of(obj) -> np.ndarray:
    if isinstance(obj, SampleCloud):
        return obj.points
    return np.asarray(obj, dtype=float)


def median_spacing(points: np.ndarray) -> float:
    """Median distance to the nearest other point (0 for fewer than 2 points)."""
    points = np.asarray(points, dtype=float)
    if len(points) < 2:
        return 0.0
    d, _ = cKDTree(points).query(points, k=2)
    return float(np.median(d[:, 1]))


@dataclass(frozen=True)
class ConnectionRule:
    """``epsilon_ball`` joins points closer than ``param``; ``k_nearest`` joins
    each point to its ``param`` nearest neighbours (symmetrised); ``traced``
    uses the polyline edges a curve tracer attached to the cloud."""

    kind: str
    param: float

    def __post_init__(self):
        if self.kind not in ("epsilon_ball", "k_nearest", "traced"):
            raise ValueError(f"unknown connection rule {self.kind!r}")
        if not self.param > 0:
            raise ValueError("connection parameter must be positive")
        if self.kind == "k_nearest" and int(self.param) != self.param:
            raise ValueError("k_nearest needs an integer k")

    @classmethod
    def epsilon(cls, delta: float) -> "ConnectionRule":
        return cls("epsilon_ball", float(delta))

    @classmethod
    def knn(cls, k: int) -> "ConnectionRule":
        return cls("k_nearest", int(k))

    @classmethod
    def traced(cls) -> "ConnectionRule":
        return cls("traced", 1)

    @classmethod
    def default_for(cls, points, factor: float = DEFAULT_RADIUS_FACTOR) -> "ConnectionRule":
        if isinstance(points, SampleCloud) and points.edges is not None:
            return cls.traced()
        h = median_spacing(_points_of(points))
        return cls.epsilon(factor * h if h > 0 else 1.0)

    def halved(self) -> "ConnectionRule":
        if self.kind == "traced":
            return self
        if self.kind == "epsilon_ball":
            return ConnectionRule.epsilon(self.param / 2)
        return ConnectionRule.knn(max(1, int(self.param) // 2))

    def label(self) -> str:
        return f"{self.kind}({self.param:g})"


@dataclass(frozen=True)
class GeodesicGraph:
    """Undirected weighted graph on ``node_points``; ``adjacency`` is a
    symmetric CSR matrix holding Euclidean edge lengths."""

    node_points: np.ndarray
    adjacency: sparse.csr_matrix
    rule: ConnectionRule
    pruned: int = 0

    @property
    def n_nodes(self) -> int:
        return len(self.node_points)

    @property
    def edges(self) -> np.ndarray:
        coo = sparse.triu(self.adjacency, k=1).tocoo()
        return np.column_stack([coo.row, coo.col])

    @property
    def weights(self) -> np.ndarray:
        return sparse.triu(self.adjacency, k=1).tocoo().data

    @property
    def n_edges(self) -> int:
        return int(sparse.triu(self.adjacency, k=1).nnz)

    def degrees(self) -> np.ndarray:
        return np.diff(self.adjacency.indptr)


def _graph_from_pairs(points: np.ndarray, pairs: np.ndarray, rule: ConnectionRule, pruned: int = 0) -> GeodesicGraph:
    n = len(points)
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    pairs = pairs[pairs[:, 0] != pairs[:, 1]]
    pairs = np.unique(np.sort(pairs, axis=1), axis=0)
    w = np.linalg.norm(points[pairs[:, 0]] - points[pairs[:, 1]], axis=1)
    # coincident points would give zero weights, which csgraph reads as "no edge"
    w = np.maximum(w, np.finfo(float).tiny)
    rows = np.concatenate([pairs[:, 0], pairs[:, 1]])
    cols = np.concatenate([pairs[:, 1], pairs[:, 0]])
    A = sparse.csr_matrix((np.concatenate([w, w]), (rows, cols)), shape=(n, n))
    pts = np.array(points, dtype=float)
    pts.setflags(write=False)
    return GeodesicGraph(pts, A, rule, pruned)


def build_graph(cloud, rule: ConnectionRule | None = None) -> GeodesicGraph:
    """Proximity graph on a cloud (a SampleCloud or an (N, n) array)."""
    points = _points_of(cloud)
    if len(points) == 0:
        raise ValueError("cannot build a graph on an empty cloud")
    rule = rule or ConnectionRule.default_for(cloud)
    if rule.kind == "traced":
        edges = getattr(cloud, "edges", None)
        if edges is None:
            raise ValueError("the traced rule needs a cloud that carries polyline edges")
        return _graph_from_pairs(points, edges, rule)
    tree = cKDTree(points)
    if rule.kind == "epsilon_ball":
        pairs = tree.query_pairs(rule.param, output_type="ndarray")
    else:
        k = min(int(rule.param), len(points) - 1)
        if k < 1:
            pairs = np.zeros((0, 2), dtype=np.int64)
        else:
            _, idx = tree.query(points, k=k + 1)
            src = np.repeat(np.arange(len(points)), k)
            pairs = np.column_stack([src, idx[:, 1:].ravel()])
    return _graph_from_pairs(points, pairs, rule)


def prune_shortcuts(graph: GeodesicGraph, constraint: Constraint, ratio: float = 0.1) -> GeodesicGraph:
    """Drop edges whose midpoint lies farther than ``ratio * length`` from the set.

    The midpoint is pulled back onto the constraint (germ, plus slice level if
    any); an edge that jumps between two sheets has its midpoint far from both
    and is removed.  Failed projections count as far.
    """
    E = graph.edges
    if not len(E) or graph.rule.kind == "traced":
        return graph
    P = graph.node_points
    mid = 0.5 * (P[E[:, 0]] + P[E[:, 1]])
    length = np.linalg.norm(P[E[:, 0]] - P[E[:, 1]], axis=1)
    proj, ok = constraint.project(mid, max_iter=30)
    off = np.where(ok, np.linalg.norm(proj - mid, axis=1), np.inf)
    keep = off <= ratio * length
    return _graph_from_pairs(np.asarray(P), E[keep], graph.rule, graph.pruned + int((~keep).sum()))


def inner_distance(graph: GeodesicGraph, i: int, j: int) -> float:
    """Shortest path length between nodes i and j; ``inf`` when unreachable."""
    n = graph.n_nodes
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"node index out of range for a graph with {n} nodes")
    if i == j:
        return 0.0
    d = dijkstra(graph.adjacency, directed=False, indices=i)
    return float(d[j])


def graph_resolution(graph: GeodesicGraph) -> float:
    """Length scale below which graph distances are unreliable: the radius of
    an epsilon graph, otherwise the median edge length."""
    if graph.rule.kind == "epsilon_ball":
        return float(graph.rule.param)
    w = graph.weights
    return float(np.median(w)) if len(w) else 0.0


@dataclass(frozen=True)
class ComponentPartition:
    labels: np.ndarray
    component_count: int
    d0: float  # inf when there is a single component
    d0_pair: tuple[int, int] | None = None

    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.component_count)


def components(graph: GeodesicGraph) -> ComponentPartition:
    """Connected components and the least Euclidean distance between two of them."""
    n = graph.n_nodes
    if n == 0:
        return ComponentPartition(np.zeros(0, dtype=int), 0, math.inf)
    count, labels = connected_components(graph.adjacency, directed=False)
    if count < 2:
        return ComponentPartition(labels, int(count), math.inf)
    P = graph.node_points
    best, pair = math.inf, None
    # nearest point of any other component, one component at a time; a k-d
    # tree query returns the exact nearest neighbour, so d0 is exact
    order = np.argsort(np.bincount(labels))
    for c in order[:-1]:
        inside = labels == c
        tree = cKDTree(P[~inside])
        d, k = tree.query(P[inside])
        m = int(np.argmin(d))
        if d[m] < best:
            best = float(d[m])
            pair = (int(np.flatnonzero(inside)[m]), int(np.flatnonzero(~inside)[k[m]]))
    pair = tuple(sorted(pair))
    return ComponentPartition(labels, int(count), best, pair)


@dataclass(frozen=True)
class LneEstimate:
    """Largest observed inner/outer ratio.

    ``defined`` is False when no examined pair was connected.
    ``resolution_limited`` flags a witness pair whose chord is within a few
    connection radii, where graph lengths are least reliable.
    """

    constant: float
    witness_pair: tuple[int, int] | None
    pairs_examined: int
    scale: float = float("nan")
    per_component: dict = field(default_factory=dict)
    defined: bool = True
    exact: bool = True
    resolution_limited: bool = False

    def to_dict(self) -> dict:
        return {
            "constant": self.constant,
            "witness_pair": list(self.witness_pair) if self.witness_pair else None,
            "pairs_examined": self.pairs_examined,
            "scale": self.scale,
            "defined": self.defined,
            "exact": self.exact,
            "resolution_limited": self.resolution_limited,
        }


def _ratio_rows(graph, sources, targets, labels, chunk=256):
    """Yield (src, ratios over targets) with cross-component and self pairs masked."""
    P = graph.node_points
    for s in range(0, len(sources), chunk):
        src = sources[s : s + chunk]
        D = dijkstra(graph.adjacency, directed=False, indices=src)[:, targets]
        E = cdist(P[src], P[targets])
        same = labels[src][:, None] == labels[targets][None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            R = np.where(same & (E > 0) & np.isfinite(D), D / np.where(E > 0, E, 1.0), -np.inf)
        yield src, R


def lne_constant(
    graph: GeodesicGraph,
    pair_budget: int = DEFAULT_PAIR_BUDGET,
    seed: int = 0,
    node_mask: np.ndarray | None = None,
    scale: float = float("nan"),
) -> LneEstimate:
    """Max of inner/outer distance over node pairs in the same component.

    All pairs are examined when the (masked) node count squared fits in the
    budget.  Otherwise a seeded set of source nodes is used, half drawn
    uniformly and half among endpoints of the closest pairs (outer distance
    below the 5th percentile), since outer-close inner-far pairs are where
    distortion lives.  ``node_mask`` restricts both endpoints of every pair.
    """
    n = graph.n_nodes
    if n < 2:
        raise ValueError("lne_constant needs at least two nodes")
    labels = connected_components(graph.adjacency, directed=False)[1]
    nodes = np.arange(n) if node_mask is None else np.flatnonzero(node_mask)
    m = len(nodes)
    if m < 2:
        return LneEstimate(math.nan, None, 0, scale, {}, defined=False)
    exact = m * m <= pair_budget
    if exact:
        sources = nodes
    else:
        rng = np.random.default_rng(seed)
        n_src = max(1, int(pair_budget // m))
        P = graph.node_points[nodes]
        sample = rng.integers(0, m, size=(min(20000, m * 4), 2))
        q05 = np.quantile(np.linalg.norm(P[sample[:, 0]] - P[sample[:, 1]], axis=1), 0.05)
        close = cKDTree(P).query_pairs(q05, output_type="ndarray")
        cand = np.unique(close.ravel()) if len(close) else np.zeros(0, dtype=int)
        k_close = min(len(cand), n_src // 2)
        chosen = rng.choice(cand, size=k_close, replace=False) if k_close else np.zeros(0, dtype=int)
        rest = np.setdiff1d(np.arange(m), chosen)
        k_rand = min(len(rest), n_src - k_close)
        chosen = np.concatenate([chosen, rng.choice(rest, size=k_rand, replace=False)])
        sources = nodes[np.sort(chosen)]

    best, wit, examined = -np.inf, None, 0
    per: dict[int, float] = {}
    for src, R in _ratio_rows(graph, sources, nodes, labels):
        examined += int(np.isfinite(R).sum())
        flat = int(np.argmax(R))
        r, c = divmod(flat, R.shape[1])
        if R[r, c] > best:
            best, wit = float(R[r, c]), (int(src[r]), int(nodes[c]))
        rowmax = R.max(axis=1)
        for lab in np.unique(labels[src]):
            v = float(rowmax[labels[src] == lab].max())
            if v > per.get(int(lab), -np.inf):
                per[int(lab)] = v
    if not np.isfinite(best):
        return LneEstimate(math.nan, None, examined, scale, {}, defined=False, exact=exact)
    best = max(best, 1.0)
    per = {k: max(v, 1.0) for k, v in per.items() if np.isfinite(v)}
    res_lim = False
    if wit is not None:
        chord = float(np.linalg.norm(graph.node_points[wit[0]] - graph.node_points[wit[1]]))
        res_lim = chord < 4 * graph_resolution(graph)
    return LneEstimate(best, tuple(sorted(wit)), examined, scale, per, True, exact, res_lim)


@dataclass(frozen=True)
class StabilityReport:
    stable: bool
    constant: float
    constant_refined: float
    factor: float
    pairs_compared: int
    detail: str = ""


def two_scale_validate(
    cloud,
    rule: ConnectionRule | None = None,
    *,
    factor: float = UNSTABLE_FACTOR,
    pair_budget: int = DEFAULT_PAIR_BUDGET,
    seed: int = 0,
    resample: Callable[[int], object] | None = None,
    prune: Constraint | None = None,
) -> StabilityReport:
    """Compare the LNE constant at the chosen radius with a finer rebuild.

    Without ``resample`` the finer graph uses half the connection radius on
    the same nodes, and both constants are taken over the nodes of its largest
    component.  With ``resample`` (a callable returning a cloud of the
    requested size) the finer graph is built on a cloud of twice the density
    with its own default rule.  A ratio outside [1/factor, factor] marks the
    estimate unstable, which is what happens when coarse edges jump across a
    narrow gap.
    """
    rule = rule or ConnectionRule.default_for(cloud)
    g1 = build_graph(cloud, rule)
    if prune is not None:
        g1 = prune_shortcuts(g1, prune)
    if resample is not None:
        cloud2 = resample(2 * g1.n_nodes)
        g2 = build_graph(cloud2, None if rule.kind != "k_nearest" else rule)
        if prune is not None:
            g2 = prune_shortcuts(g2, prune)
        e1 = lne_constant(g1, pair_budget, seed)
        e2 = lne_constant(g2, pair_budget, seed)
    else:
        g2 = build_graph(cloud, rule.halved())
        if prune is not None:
            g2 = prune_shortcuts(g2, prune)
        lab2 = connected_components(g2.adjacency, directed=False)[1]
        mask = lab2 == np.bincount(lab2).argmax()
        if mask.sum() < 2:
            return StabilityReport(False, math.nan, math.nan, math.nan, 0, "finer graph has no edges")
        e1 = lne_constant(g1, pair_budget, seed, node_mask=mask)
        e2 = lne_constant(g2, pair_budget, seed, node_mask=mask)
    if not (e1.defined and e2.defined):
        return StabilityReport(False, e1.constant, e2.constant, math.nan, 0, "undefined estimate")
    f = max(e1.constant, e2.constant) / min(e1.constant, e2.constant)
    return StabilityReport(bool(f <= factor), e1.constant, e2.constant, float(f),
                           min(e1.pairs_examined, e2.pairs_examined))


@dataclass(frozen=True)
class CloudGerm:
    """A germ known only through sample points, optionally joined by polyline
    edges (a curve that is not the zero set of polynomials, such as a spiral).

    Only graph-level operations apply: balls and sphere slices are cut from
    the points, never resampled.
    """

    points: np.ndarray
    basepoint: np.ndarray
    edges: np.ndarray | None = None
    name: str = "cloud"

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "basepoint", np.array(self.basepoint, dtype=float))
        if self.edges is not None:
            e = np.array(self.edges, dtype=np.int64).reshape(-1, 2)
            e.setflags(write=False)
            object.__setattr__(self, "edges", e)

    @property
    def ref(self) -> str:
        return self.name

    @property
    def p(self) -> np.ndarray:
        return self.basepoint

    @property
    def ambient_dim(self) -> int:
        return self.points.shape[1]

    def ball(self, t: float) -> SampleCloud:
        """Points within distance t of the basepoint, with the edges between them."""
        inside = np.linalg.norm(self.points - self.basepoint, axis=1) <= t
        idx = np.flatnonzero(inside)
        edges = None
        if self.edges is not None:
            keep = inside[self.edges[:, 0]] & inside[self.edges[:, 1]]
            remap = -np.ones(len(self.points), dtype=np.int64)
            remap[idx] = np.arange(len(idx))
            edges = remap[self.edges[keep]]
        return SampleCloud(self.points[idx], self.name, t, "ball", 0, len(idx), edges=edges)

    def sphere_slice(self, t: float, width: float | None = None) -> SampleCloud:
        """Crossings of the polyline with the sphere of radius t; without
        edges, the points within ``width`` of the sphere."""
        r = np.linalg.norm(self.points - self.basepoint, axis=1)
        if self.edges is None:
            if width is None:
                raise ValueError("a cloud without edges needs a slice width")
            sel = np.abs(r - t) <= width
            return SampleCloud(self.points[sel], self.name, t, "sphere_slice", 0, int(sel.sum()))
        # nodes on the sphere are crossings themselves; otherwise one crossing
        # per edge whose ends lie on opposite sides (a chord can dip below
        # the sphere and come back, so only sign changes count)
        side = np.sign(r - t)
        side[np.abs(r - t) <= 1e-12 * t] = 0
        out = list(self.points[side == 0])
        a, b = self.edges[:, 0], self.edges[:, 1]
        for i, j in self.edges[side[a] * side[b] < 0]:
            u = self.points[i] - self.basepoint
            v = self.points[j] - self.points[i]
            A, B, C = v @ v, 2 * u @ v, u @ u - t * t
            disc = max(B * B - 4 * A * C, 0.0)
            roots = [(-B + sgn * math.sqrt(disc)) / (2 * A) for sgn in (1, -1)]
            s = min(roots, key=lambda x: abs(x - np.clip(x, 0, 1)))
            out.append(self.points[i] + np.clip(s, 0, 1) * v)
        pts = np.array(out).reshape(-1, self.ambient_dim)
        return SampleCloud(pts, self.name, t, "sphere_slice", 0, len(pts))
