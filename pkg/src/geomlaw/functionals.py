"""Functionals of point sets and graphs.

A per-point functional is an :class:`Xi`: given a (marked) configuration it
returns one nonnegative value per point, and optionally a local signature of
the configuration around a point (used by the stabilization detector).
Summing those values gives the induced global functional ``H_xi``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Hashable

import numpy as np

from .graphs import GeoGraph, PatternSpec, VoronoiDiagram, build_graph
from .point_process import MarkedPointSet
from .spatial import SpatialIndex, as_points
from .unionfind import UnionFind


# --------------------------------------------------------------- weights

@dataclass(frozen=True)
class WeightFn:
    """Edge weight phi on [0, inf].

    kinds: ``power`` (x**alpha), ``indicator`` (1 on [0, t]), ``table``
    (piecewise linear through ``xs``/``ys``, constant ``ys[-1]`` beyond),
    ``constant``.  ``at_infinity`` is phi(inf); it defaults to inf for
    powers with alpha > 0 and to the natural limit otherwise.
    """

    kind: str
    alpha: float = 1.0
    t: float = 0.0
    xs: tuple = ()
    ys: tuple = ()
    c: float = 1.0
    at_infinity: float | None = None
    growth_order: float | None = None

    def __post_init__(self):
        if self.kind not in ("power", "indicator", "table", "constant"):
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if self.kind == "table":
            xs, ys = np.asarray(self.xs, float), np.asarray(self.ys, float)
            if len(xs) < 1 or xs.shape != ys.shape or np.any(np.diff(xs) <= 0):
                raise ValueError("table needs increasing xs and matching ys")
            if np.any(ys < 0) or not np.all(np.isfinite(ys)):
                raise ValueError("table values must be finite and nonnegative")
        if self.kind == "constant" and self.c < 0:
            raise ValueError("constant weight must be nonnegative")
        if self.at_infinity is not None and self.at_infinity < 0:
            raise ValueError("phi(inf) must be nonnegative")

    @classmethod
    def power(cls, alpha: float, at_infinity: float | None = None) -> "WeightFn":
        return cls("power", alpha=float(alpha), at_infinity=at_infinity, growth_order=float(alpha))

    @classmethod
    def indicator(cls, t: float) -> "WeightFn":
        return cls("indicator", t=float(t))

    @classmethod
    def table(cls, xs, ys) -> "WeightFn":
        return cls("table", xs=tuple(map(float, xs)), ys=tuple(map(float, ys)))

    @classmethod
    def constant(cls, c: float = 1.0) -> "WeightFn":
        return cls("constant", c=float(c), growth_order=0.0)

    @property
    def value_at_infinity(self) -> float:
        if self.at_infinity is not None:
            return float(self.at_infinity)
        if self.kind == "power":
            return math.inf if self.alpha > 0 else 1.0
        if self.kind == "indicator":
            return 0.0
        if self.kind == "table":
            return float(self.ys[-1])
        return self.c

    @property
    def homogeneity(self) -> float | None:
        if self.kind == "power":
            return self.alpha
        if self.kind == "constant":
            return 0.0
        return None

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        inf = np.isinf(x)
        xf = np.where(inf, 0.0, x)
        if self.kind == "power":
            val = xf ** self.alpha
        elif self.kind == "indicator":
            val = (xf <= self.t).astype(float)
        elif self.kind == "table":
            val = np.interp(xf, self.xs, self.ys)
        else:
            val = np.full_like(xf, self.c)
        return np.where(inf, self.value_at_infinity, val)

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        if self.kind == "power":
            out["alpha"] = self.alpha
        elif self.kind == "indicator":
            out["t"] = self.t
        elif self.kind == "table":
            out["xs"], out["ys"] = list(self.xs), list(self.ys)
        else:
            out["c"] = self.c
        if self.at_infinity is not None:
            out["at_infinity"] = self.at_infinity
        return out

    @classmethod
    def from_dict(cls, spec: dict) -> "WeightFn":
        kind = spec["kind"]
        inf = spec.get("at_infinity")
        if kind == "power":
            return cls.power(spec.get("alpha", 1.0), inf)
        if kind == "indicator":
            return cls.indicator(spec["t"])
        if kind == "table":
            return cls.table(spec["xs"], spec["ys"])
        if kind == "constant":
            return cls("constant", c=float(spec.get("c", 1.0)), at_infinity=inf, growth_order=0.0)
        raise ValueError(f"unknown weight kind {kind!r}")


# ------------------------------------------------------------------ xi

Values = Callable[[MarkedPointSet], np.ndarray]
Local = Callable[[MarkedPointSet, int], tuple[float, Hashable]]


@dataclass
class Xi:
    """A translation-invariant per-point functional.

    ``values(config)`` returns xi(x; config) for every point.  ``local``
    returns ``(value, signature)`` at one point, where the signature encodes
    the local structure the value is read from (e.g. the incident edge set).
    ``homogeneity`` is the order gamma when xi(ax; aX) = a^gamma xi(x; X).
    """

    name: str
    values: Values
    local: Local | None = None
    homogeneity: float | None = None
    marks: object = None   # MarkSpec the functional needs, if any
    params: dict = field(default_factory=dict)

    def at(self, config: MarkedPointSet, i: int) -> tuple[float, Hashable]:
        if self.local is not None:
            return self.local(config, i)
        v = float(self.values(config)[i])
        return v, None


def _config(points, marks: MarkedPointSet | None = None, scale: float = 1.0) -> MarkedPointSet:
    pts = as_points(points) * scale
    if marks is None:
        return MarkedPointSet(pts)
    return MarkedPointSet(pts, marks.arrival, marks.radius, marks.radius_bound)


def xi_values(points, xi: Xi, scale: float = 1.0, marks: MarkedPointSet | None = None) -> np.ndarray:
    if not scale > 0:
        raise ValueError("scale must be positive")
    vals = np.asarray(xi.values(_config(points, marks, scale)), dtype=float)
    if np.any(~np.isfinite(vals)) or np.any(vals < 0):
        raise ValueError(f"functional {xi.name!r} returned a negative or non-finite value")
    return vals


def h_xi(points, xi: Xi, scale: float = 1.0, marks: MarkedPointSet | None = None) -> float:
    """H_xi of the configuration ``scale * points``."""
    return float(np.sum(xi_values(points, xi, scale, marks)))


def sample_variance_xi(points, xi: Xi, scale: float = 1.0,
                       marks: MarkedPointSet | None = None) -> float:
    """Variance of the per-point values with the 1/n normaliser."""
    vals = xi_values(points, xi, scale, marks)
    if len(vals) < 2:
        raise ValueError("sample variance needs at least 2 points")
    return float(np.var(vals))


def _coords_key(points: np.ndarray, ids) -> frozenset:
    return frozenset(tuple(points[j]) for j in ids)


def constant_xi(c: float = 1.0) -> Xi:
    return Xi(f"constant({c})", lambda cfg: np.full(len(cfg.points), float(c)),
              lambda cfg, i: (float(c), None), homogeneity=0.0)


def ball_count_xi(rho: float) -> Xi:
    """Number of other points within distance rho: a fixed-range functional."""
    def values(cfg):
        idx = SpatialIndex(cfg.points)
        return np.array([len(idx.range_query(p, rho)) - 1 for p in cfg.points], dtype=float)

    def local(cfg, i):
        idx = SpatialIndex(cfg.points)
        v = float(len(idx.range_query(cfg.points[i], rho)) - 1)
        return v, None
    return Xi(f"ball_count({rho})", values, local, params={"rho": rho})


def nn_distance_xi(alpha: float = 1.0) -> Xi:
    """Nearest-neighbour distance to the power alpha (homogeneous of order alpha)."""
    def values(cfg):
        _, d = SpatialIndex(cfg.points).knn_all(1)
        return d[:, 0] ** alpha

    def local(cfg, i):
        idx, d = SpatialIndex(cfg.points).k_nearest(cfg.points[i], 1, exclude=i)
        return float(d[0] ** alpha), tuple(cfg.points[idx[0]])
    return Xi(f"nn_distance^{alpha}", values, local, homogeneity=float(alpha),
              params={"alpha": alpha})


# ----------------------------------------------------------- edge weights

def _check_voronoi_phi(graph, phi: WeightFn) -> None:
    if isinstance(graph, VoronoiDiagram) and phi.value_at_infinity != 0:
        raise ValueError("Voronoi functionals need phi(inf) = 0 "
                         f"(got phi(inf) = {phi.value_at_infinity})")


def weighted_length(graph: GeoGraph | VoronoiDiagram, phi: WeightFn, scale: float = 1.0) -> float:
    """Sum of phi(scale * |e|) over all edges; infinite edges give phi(inf)."""
    _check_voronoi_phi(graph, phi)
    if graph.n_edges == 0:
        return 0.0
    return float(np.sum(phi(scale * graph.lengths)))


def vertex_weights(graph: GeoGraph | VoronoiDiagram, phi: WeightFn, scale: float = 1.0) -> np.ndarray:
    """Per-vertex split of the weighted length.

    Undirected: half the weight of every incident edge.  Directed: the full
    weight of every edge going into the vertex.
    """
    _check_voronoi_phi(graph, phi)
    out = np.zeros(graph.n)
    if graph.n_edges == 0:
        return out
    w = phi(scale * graph.lengths)
    e = graph.edges
    if getattr(graph, "directed", False):
        np.add.at(out, e[:, 1], w)
    else:
        np.add.at(out, e[:, 0], 0.5 * w)
        np.add.at(out, e[:, 1], 0.5 * w)
    return out


def _graph_of(cfg: MarkedPointSet, kind: str, k: int, directed: bool):
    return build_graph(kind, cfg.points, k=k, directed=directed)


def _edge_signature(graph, i: int) -> frozenset:
    """Incident edges of ``i`` keyed by the other endpoint's coordinates and direction."""
    ids = graph.incident(i, "all")
    e = graph.edges[ids]
    pts = graph.points
    if getattr(graph, "directed", False):
        return frozenset((tuple(pts[b]), "out") if a == i else (tuple(pts[a]), "in") for a, b in e)
    return frozenset(tuple(pts[b if a == i else a]) for a, b in e)


def edge_xi(kind: str, phi: WeightFn, k: int = 1, directed: bool = False) -> Xi:
    """Half the phi-weighted incident edge sum (in-edges, no half, if directed)."""
    def values(cfg):
        return vertex_weights(_graph_of(cfg, kind, k, directed), phi)

    def local(cfg, i):
        g = _graph_of(cfg, kind, k, directed)
        return float(vertex_weights(g, phi)[i]), _edge_signature(g, i)
    return Xi(f"edge[{kind}]", values, local, homogeneity=phi.homogeneity,
              params={"graph": kind, "k": k, "directed": directed, "phi": phi.to_dict()})


# ------------------------------------------------------------- components

def component_labels(graph: GeoGraph) -> np.ndarray:
    uf = UnionFind(graph.n)
    for i, j in graph.edges:
        uf.union(int(i), int(j))
    return uf.labels() if graph.n else np.empty(0, dtype=np.intp)


def component_count(graph: GeoGraph) -> int:
    if graph.n == 0:
        return 0
    return int(component_labels(graph).max()) + 1


def component_orders(graph: GeoGraph) -> np.ndarray:
    """Order of the component containing each vertex."""
    labels = component_labels(graph)
    if len(labels) == 0:
        return labels
    return np.bincount(labels)[labels]


def component_order_of(graph: GeoGraph, vertex: int) -> int:
    if not 0 <= vertex < graph.n:
        raise IndexError(f"vertex {vertex} out of range")
    return int(component_orders(graph)[vertex])


def component_xi(kind: str, k: int = 1, directed: bool = False) -> Xi:
    """Reciprocal order of the component containing the point."""
    def values(cfg):
        return 1.0 / component_orders(_graph_of(cfg, kind, k, directed))

    def local(cfg, i):
        g = _graph_of(cfg, kind, k, directed)
        labels = component_labels(g)
        members = np.flatnonzero(labels == labels[i])
        return 1.0 / len(members), _coords_key(g.points, members)
    return Xi(f"component[{kind}]", values, local, homogeneity=0.0,
              params={"graph": kind, "k": k, "directed": directed})


# --------------------------------------------------------------- patterns

def _bfs_order(adj: list[set], root: int):
    order, parent, seen = [root], {root: None}, {root}
    pos = 0
    while pos < len(order):
        u = order[pos]
        pos += 1
        for w in sorted(adj[u]):
            if w not in seen:
                seen.add(w)
                parent[w] = u
                order.append(w)
    return order, parent


def _embeds_at(nbrs: list[set], x: int, adj: list[set], root: int) -> bool:
    order, parent = _bfs_order(adj, root)
    mapping = {root: x}
    used = {x}

    def extend(pos: int) -> bool:
        if pos == len(order):
            return True
        u = order[pos]
        for c in sorted(nbrs[mapping[parent[u]]]):
            if c in used:
                continue
            if all(mapping[w] in nbrs[c] for w in adj[u] if w in mapping):
                mapping[u] = c
                used.add(c)
                if extend(pos + 1):
                    return True
                del mapping[u]
                used.discard(c)
        return False

    return extend(1)


def pattern_vertices(graph: GeoGraph, gamma: PatternSpec) -> np.ndarray:
    """Boolean mask of vertices at which ``gamma`` occurs.

    ``degree(m)``: vertex degree exactly m; ``star(m)``: degree at least m;
    ``explicit``: some (not necessarily induced) subgraph isomorphic to the
    pattern uses the vertex.  Directed graphs are read as undirected.
    """
    nbrs = graph.neighbor_sets()
    deg = np.array([len(s) for s in nbrs], dtype=int)
    if gamma.kind == "degree":
        return deg == gamma.m
    if gamma.kind == "star":
        return deg >= gamma.m
    adj = gamma.adjacency()
    out = np.zeros(graph.n, dtype=bool)
    for x in range(graph.n):
        if deg[x] == 0 and gamma.n_vertices > 1:
            continue
        for root in range(gamma.n_vertices):
            if len(adj[root]) > deg[x]:
                continue
            if _embeds_at(nbrs, x, adj, root):
                out[x] = True
                break
    return out


def vertex_pattern_count(graph: GeoGraph, gamma: PatternSpec) -> int:
    return int(np.count_nonzero(pattern_vertices(graph, gamma)))


def pattern_xi(kind: str, gamma: PatternSpec, k: int = 1, directed: bool = False) -> Xi:
    def values(cfg):
        return pattern_vertices(_graph_of(cfg, kind, k, directed), gamma).astype(float)

    def local(cfg, i):
        g = _graph_of(cfg, kind, k, directed)
        # the event depends on the graph within distance diam(gamma) of i
        return float(pattern_vertices(g, gamma)[i]), _edge_signature(g, i)
    return Xi(f"pattern[{kind}]", values, local, homogeneity=0.0,
              params={"graph": kind, "k": k, "directed": directed, "pattern": gamma.to_dict()})


# ------------------------------------------------------------------ ECDFs

@dataclass
class ECDF:
    t: np.ndarray
    values: np.ndarray
    count: int

    @property
    def empty(self) -> bool:
        return self.count == 0

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for t, v in zip(self.t, self.values):
                fh.write(f"{float(t)!r},{float(v)!r}\n")


def _ecdf(sample: np.ndarray, t_grid) -> ECDF:
    t = np.asarray(t_grid, dtype=float)
    if np.any(np.diff(t) < 0):
        raise ValueError("t_grid must be sorted ascending")
    if len(sample) == 0:
        return ECDF(t, np.zeros(len(t)), 0)
    s = np.sort(sample)
    return ECDF(t, np.searchsorted(s, t, side="right") / len(s), len(s))


def edge_length_ecdf(graph: GeoGraph, scale: float, t_grid) -> ECDF:
    """Fraction of edges with scale*|e| <= t for each t in the grid."""
    return _ecdf(scale * graph.lengths, t_grid)


def cell_area_ecdf(diagram: VoronoiDiagram, scale: float, t_grid) -> ECDF:
    """Fraction of cells with scale*area <= t; unbounded cells never count."""
    return _ecdf(scale * diagram.cell_areas, t_grid)
