"""Geometric graphs on point sets.

Builders for the minimal spanning tree, k-nearest-neighbour graphs, the
planar Delaunay/Voronoi pair, the sphere of influence graph and the Gabriel
and relative neighbourhood graphs.  Every builder returns an immutable
:class:`GeoGraph` whose edge lengths are recomputed from the vertex
coordinates.

Conventions: SIG overlap is closed (tangent balls connect); the Gabriel and
RNG blocking regions are open (a point on the boundary does not block); MST
ties are broken by the (length, i, j) order.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.spatial import Delaunay, QhullError

from .spatial import SpatialIndex, Window, as_points
from .unionfind import UnionFind


class DegenerateConfiguration(ValueError):
    pass


@dataclass(eq=False)
class GeoGraph:
    points: np.ndarray
    edges: np.ndarray
    lengths: np.ndarray
    directed: bool = False
    kind: str = ""
    params: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def _csr(self):
        n, m = self.n, self.n_edges
        out = {}
        for name, col in (("src", 0), ("dst", 1)):
            ends = self.edges[:, col] if m else np.empty(0, dtype=np.intp)
            order = np.argsort(ends, kind="stable")
            ptr = np.concatenate([[0], np.cumsum(np.bincount(ends, minlength=n))])
            out[name] = (ptr, order)
        return out

    def incident(self, v: int, mode: str = "all") -> np.ndarray:
        """Edge ids incident to ``v``; ``mode`` is 'all', 'out' or 'in'."""
        if not 0 <= v < self.n:
            raise IndexError(f"vertex {v} out of range")
        parts = []
        if mode in ("all", "out"):
            ptr, order = self._csr["src"]
            parts.append(order[ptr[v]:ptr[v + 1]])
        if mode in ("all", "in"):
            ptr, order = self._csr["dst"]
            parts.append(order[ptr[v]:ptr[v + 1]])
        if mode not in ("all", "out", "in"):
            raise ValueError(f"unknown mode {mode!r}")
        return np.sort(np.concatenate(parts))

    def degrees(self, mode: str = "all") -> np.ndarray:
        n = self.n
        src = np.bincount(self.edges[:, 0], minlength=n) if self.n_edges else np.zeros(n, int)
        dst = np.bincount(self.edges[:, 1], minlength=n) if self.n_edges else np.zeros(n, int)
        return {"all": src + dst, "out": src, "in": dst}[mode]

    def neighbor_sets(self) -> list[set]:
        """Undirected adjacency sets (directed edges read both ways)."""
        nbrs = [set() for _ in range(self.n)]
        for i, j in self.edges:
            nbrs[i].add(int(j))
            nbrs[j].add(int(i))
        return nbrs

    def edge_set(self) -> set:
        return {(int(i), int(j)) for i, j in self.edges}

    def to_csv(self, path, header: bool = False) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            if header:
                fh.write("i,j,length\n")
            for (i, j), ln in zip(self.edges, self.lengths):
                fh.write(f"{int(i)},{int(j)},{float(ln)!r}\n")

    def to_json(self) -> str:
        return json.dumps({
            "kind": self.kind,
            "directed": self.directed,
            "params": self.params,
            "vertices": self.points.tolist(),
            "edges": [[int(i), int(j), float(ln)] for (i, j), ln in zip(self.edges, self.lengths)],
        })


def edge_lengths(points: np.ndarray, edges: np.ndarray) -> np.ndarray:
    if len(edges) == 0:
        return np.empty(0)
    diff = points[edges[:, 0]] - points[edges[:, 1]]
    return np.sqrt(np.einsum("ij,ij->i", diff, diff))


def make_graph(points, pairs, directed: bool = False, kind: str = "", **params) -> GeoGraph:
    """Canonical graph from an edge list: no loops, no duplicates, sorted."""
    points = as_points(points)
    pairs = np.asarray(pairs, dtype=np.intp).reshape(-1, 2)
    pairs = pairs[pairs[:, 0] != pairs[:, 1]]
    if not directed:
        pairs = np.sort(pairs, axis=1)
    if len(pairs):
        pairs = np.unique(pairs, axis=0)
    return GeoGraph(points, pairs, edge_lengths(points, pairs), directed, kind, dict(params))


def empty_graph(points, kind: str = "", directed: bool = False) -> GeoGraph:
    return make_graph(points, np.empty((0, 2), dtype=np.intp), directed, kind)


def complete_pairs(n: int) -> np.ndarray:
    i, j = np.triu_indices(n, k=1)
    return np.column_stack([i, j])


# ----------------------------------------------------------------- Delaunay

def circumcenters(points: np.ndarray, simplices: np.ndarray) -> np.ndarray:
    a = points[simplices[:, 0]]
    b = points[simplices[:, 1]] - a
    c = points[simplices[:, 2]] - a
    d = 2.0 * (b[:, 0] * c[:, 1] - b[:, 1] * c[:, 0])
    b2 = np.einsum("ij,ij->i", b, b)
    c2 = np.einsum("ij,ij->i", c, c)
    ux = (c[:, 1] * b2 - b[:, 1] * c2) / d
    uy = (b[:, 0] * c2 - c[:, 0] * b2) / d
    return a + np.column_stack([ux, uy])


def incircle(a, b, c, p) -> np.ndarray:
    """Positive when ``p`` lies inside the circle through counter-clockwise a, b, c."""
    ad, bd, cd = a - p, b - p, c - p
    ad2 = np.einsum("...i,...i->...", ad, ad)
    bd2 = np.einsum("...i,...i->...", bd, bd)
    cd2 = np.einsum("...i,...i->...", cd, cd)
    return (ad[..., 0] * (bd[..., 1] * cd2 - bd2 * cd[..., 1])
            - ad[..., 1] * (bd[..., 0] * cd2 - bd2 * cd[..., 0])
            + ad2 * (bd[..., 0] * cd[..., 1] - bd[..., 1] * cd[..., 0]))


def orient(a, b, c) -> np.ndarray:
    return ((b[..., 0] - a[..., 0]) * (c[..., 1] - a[..., 1])
            - (b[..., 1] - a[..., 1]) * (c[..., 0] - a[..., 0]))


def _check_planar_input(points: np.ndarray) -> None:
    if points.shape[1] != 2:
        raise ValueError("Delaunay/Voronoi graphs are only defined here for d = 2")
    if len(np.unique(points, axis=0)) != len(points):
        raise DegenerateConfiguration("duplicate points")


def _is_collinear(points: np.ndarray) -> bool:
    if len(points) < 3:
        return True
    centred = points - points.mean(axis=0)
    s = np.linalg.svd(centred, compute_uv=False)
    return s[1] <= 1e-12 * max(s[0], 1e-300)


@dataclass
class Triangulation:
    points: np.ndarray
    simplices: np.ndarray      # counter-clockwise triangles
    neighbors: np.ndarray      # neighbors[t, k] is opposite vertex k, -1 on the hull
    cocircular: bool           # some adjacent triangle pair is (nearly) cocircular

    @cached_property
    def edges(self) -> np.ndarray:
        s = self.simplices
        pairs = np.concatenate([s[:, [1, 2]], s[:, [2, 0]], s[:, [0, 1]]])
        return np.unique(np.sort(pairs, axis=1), axis=0)


def triangulate(points) -> Triangulation:
    """Delaunay triangulation of a planar point set (Qhull)."""
    points = as_points(points, 2)
    _check_planar_input(points)
    if _is_collinear(points):
        raise DegenerateConfiguration("degenerate configuration: points are collinear")
    try:
        tri = Delaunay(points)
    except QhullError as exc:
        raise DegenerateConfiguration(f"degenerate configuration: {exc}") from exc
    if len(tri.coplanar):
        raise DegenerateConfiguration("degenerate configuration: points dropped by Qhull")
    s = tri.simplices.copy()
    nb = tri.neighbors.copy()
    o = orient(points[s[:, 0]], points[s[:, 1]], points[s[:, 2]])
    flip = o < 0
    # swapping vertices 1 and 2 keeps neighbors[t, k] opposite vertex k
    s[flip, 1], s[flip, 2] = s[flip, 2].copy(), s[flip, 1].copy()
    nb[flip, 1], nb[flip, 2] = nb[flip, 2].copy(), nb[flip, 1].copy()

    t = np.repeat(np.arange(len(s)), 3)
    k = np.tile(np.arange(3), len(s))
    u = nb[t, k]
    inner = u > t
    t, k, u = t[inner], k[inner], u[inner]
    cocirc = False
    if len(t):
        # opposite vertex of the neighbour across the shared edge
        a = s[t, (k + 1) % 3]
        b = s[t, (k + 2) % 3]
        opp = np.where((s[u] != a[:, None]) & (s[u] != b[:, None]))
        far = np.full(len(u), -1)
        far[opp[0]] = s[u][opp]
        tri_pts = points[s[t]]
        val = incircle(tri_pts[:, 0], tri_pts[:, 1], tri_pts[:, 2], points[far])
        scale = np.max(np.abs(tri_pts - points[far][:, None, :]), axis=(1, 2)) ** 4
        cocirc = bool(np.any(np.abs(val) <= 1e-10 * scale))
    return Triangulation(points, s, nb, cocirc)


def delaunay(points) -> GeoGraph:
    points = as_points(points, 2)
    n = len(points)
    if n < 2:
        return empty_graph(points, "delaunay")
    if n == 2:
        _check_planar_input(points)
        return make_graph(points, [[0, 1]], kind="delaunay")
    return make_graph(points, triangulate(points).edges, kind="delaunay")


# ------------------------------------------------------------------ Voronoi

def _clip_lines(p0, dvec, tmin, tmax, lo, hi):
    """Liang-Barsky clipping of p0 + t*dvec, t in [tmin, tmax], to a box."""
    t0 = np.array(tmin, dtype=float, copy=True)
    t1 = np.array(tmax, dtype=float, copy=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        for ax in range(p0.shape[1]):
            dv = dvec[:, ax]
            par = dv == 0
            outside = par & ((p0[:, ax] < lo[ax]) | (p0[:, ax] > hi[ax]))
            ta = (lo[ax] - p0[:, ax]) / dv
            tb = (hi[ax] - p0[:, ax]) / dv
            enter = np.where(par, -np.inf, np.minimum(ta, tb))
            leave = np.where(par, np.inf, np.maximum(ta, tb))
            t0 = np.maximum(t0, enter)
            t1 = np.minimum(t1, leave)
            t1 = np.where(outside, -np.inf, t1)
    return t0, t1


def clip_polygon(poly: np.ndarray, normal: np.ndarray, offset: float) -> np.ndarray:
    """Keep the part of a convex polygon where ``normal . x <= offset``."""
    if len(poly) == 0:
        return poly
    s = poly @ normal - offset
    out = []
    m = len(poly)
    for a in range(m):
        b = (a + 1) % m
        pa, pb, sa, sb = poly[a], poly[b], s[a], s[b]
        if sa <= 0:
            out.append(pa)
        if (sa < 0 < sb) or (sb < 0 < sa):
            out.append(pa + (pb - pa) * (sa / (sa - sb)))
    return np.array(out) if out else np.empty((0, 2))


def polygon_area(poly: np.ndarray) -> float:
    if len(poly) < 3:
        return 0.0
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


@dataclass(eq=False)
class VoronoiDiagram:
    """Voronoi diagram of a planar point set with its Delaunay dual.

    ``vor_lengths[e]`` is the length of the Voronoi edge dual to Delaunay edge
    ``delaunay.edges[e]``; unbounded edges have length ``inf`` unless a clip
    window is given, in which case all lengths are of the clipped pieces.
    """

    points: np.ndarray
    delaunay: GeoGraph
    vor_lengths: np.ndarray
    vor_start: np.ndarray       # (m, 2) finite start point of each Voronoi edge
    vor_dir: np.ndarray         # (m, 2) direction vector
    vor_tmin: np.ndarray        # parameter range: segment [0, 1], ray [0, inf), line (-inf, inf)
    vor_tmax: np.ndarray
    clip: Window | None = None
    kind: str = "voronoi"

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def n_edges(self) -> int:
        return len(self.vor_lengths)

    @property
    def infinite(self) -> np.ndarray:
        return ~np.isfinite(self.vor_tmax) | ~np.isfinite(self.vor_tmin)

    @cached_property
    def bounded(self) -> np.ndarray:
        """Whether each (unclipped) cell is bounded."""
        out = np.ones(self.n, dtype=bool)
        if self.n <= 2:
            out[:] = False
            return out
        e = self.delaunay.edges[self.infinite]
        out[e.ravel()] = False
        return out

    @cached_property
    def cell_areas(self) -> np.ndarray:
        if self.clip is not None:
            return np.array([polygon_area(p) for p in self.cell_polygons()])
        areas = np.full(self.n, np.inf)
        fin = ~self.infinite
        if self.n <= 2 or not fin.any():
            return areas
        e = self.delaunay.edges[fin]
        p0 = self.vor_start[fin]
        p1 = p0 + self.vor_dir[fin] * self.vor_tmax[fin][:, None]
        acc = np.zeros(self.n)
        for col in (0, 1):
            site = self.points[e[:, col]]
            u, v = p0 - site, p1 - site
            np.add.at(acc, e[:, col], 0.5 * np.abs(u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0]))
        areas[self.bounded] = acc[self.bounded]
        return areas

    def cell_polygons(self) -> list[np.ndarray]:
        """Cells clipped to the clip window (half-plane intersection)."""
        if self.clip is None or self.clip.kind != "box":
            raise ValueError("cell polygons need a box clip window")
        lo, hi = self.clip.bounds()
        box = np.array([[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]])
        nbrs = self.delaunay.neighbor_sets()
        polys = []
        for i in range(self.n):
            poly = box
            xi = self.points[i]
            for j in sorted(nbrs[i]):
                normal = self.points[j] - xi
                mid = 0.5 * (self.points[j] + xi)
                poly = clip_polygon(poly, normal, float(normal @ mid))
                if len(poly) == 0:
                    break
            polys.append(poly)
        return polys

    def incident(self, v: int, mode: str = "all") -> np.ndarray:
        return self.delaunay.incident(v, "all")

    @property
    def lengths(self) -> np.ndarray:
        return self.vor_lengths

    @property
    def edges(self) -> np.ndarray:
        return self.delaunay.edges


def delaunay_voronoi_2d(points, clip: Window | None = None) -> VoronoiDiagram:
    """Delaunay triangulation and dual Voronoi diagram of a planar point set."""
    points = as_points(points, 2)
    n = len(points)
    if clip is not None and (clip.kind != "box" or clip.dim != 2):
        raise ValueError("clip window must be a planar box")
    empty2 = np.empty((0, 2))
    if n == 0:
        raise ValueError("Voronoi diagram needs at least one point")
    if n == 1:
        dg = empty_graph(points, "delaunay")
        diag = VoronoiDiagram(points, dg, np.empty(0), empty2, empty2, np.empty(0),
                              np.empty(0), clip)
        if clip is None:
            diag.__dict__["cell_areas"] = np.array([np.inf])
        return diag
    if n == 2:
        _check_planar_input(points)
        dg = make_graph(points, [[0, 1]], kind="delaunay")
        mid = 0.5 * (points[0] + points[1])
        dv = points[1] - points[0]
        start, dirs = mid[None, :], np.array([[-dv[1], dv[0]]])
        tmin, tmax = np.array([-np.inf]), np.array([np.inf])
    else:
        tri = triangulate(points)
        s, nb = tri.simplices, tri.neighbors
        cc = circumcenters(points, s)
        t = np.repeat(np.arange(len(s)), 3)
        k = np.tile(np.arange(3), len(s))
        u = nb[t, k]
        keep = (u < 0) | (u > t)
        t, k, u = t[keep], k[keep], u[keep]
        a, b, c = s[t, (k + 1) % 3], s[t, (k + 2) % 3], s[t, k]
        pairs = np.sort(np.column_stack([a, b]), axis=1)
        order = np.lexsort((pairs[:, 1], pairs[:, 0]))
        pairs, t, u, a, b, c = pairs[order], t[order], u[order], a[order], b[order], c[order]
        dg = GeoGraph(points, pairs, edge_lengths(points, pairs), False, "delaunay", {})
        start = cc[t]
        hull = u < 0
        dirs = np.where(hull[:, None], 0.0, cc[np.maximum(u, 0)] - cc[t])
        # outward normal of hull edge (a, b), pointing away from the third vertex c
        ev = points[b] - points[a]
        normal = np.column_stack([ev[:, 1], -ev[:, 0]])
        side = np.einsum("ij,ij->i", normal, points[c] - points[a])
        normal[side > 0] *= -1
        dirs[hull] = normal[hull]
        tmin = np.zeros(len(t))
        tmax = np.where(hull, np.inf, 1.0)
    norms = np.linalg.norm(dirs, axis=1)
    if clip is None:
        lengths = np.where(np.isfinite(tmax) & np.isfinite(tmin), norms * (tmax - tmin), np.inf)
    else:
        lo, hi = clip.bounds()
        t0, t1 = _clip_lines(start, dirs, tmin, tmax, lo, hi)
        lengths = np.where(t1 > t0, (t1 - t0) * norms, 0.0)
    return VoronoiDiagram(points, dg, lengths, start, dirs, tmin, tmax, clip)


# --------------------------------------------------------------------- MST

def _kruskal(points: np.ndarray, pairs: np.ndarray) -> np.ndarray:
    n = len(points)
    lengths = edge_lengths(points, pairs)
    order = np.lexsort((pairs[:, 1], pairs[:, 0], lengths))
    uf = UnionFind(n)
    chosen = []
    for e in order:
        i, j = pairs[e]
        if uf.union(int(i), int(j)):
            chosen.append(e)
            if len(chosen) == n - 1:
                break
    return pairs[np.array(chosen, dtype=np.intp)] if chosen else np.empty((0, 2), np.intp)


def _prim(points: np.ndarray) -> np.ndarray:
    """O(n^2) Prim under the strict (length, i, j) edge order."""
    n = len(points)
    idx = np.arange(n)
    in_tree = np.zeros(n, dtype=bool)
    best_d = np.full(n, np.inf)
    best_p = np.full(n, -1)
    cur = 0
    in_tree[0] = True
    out = []
    for _ in range(n - 1):
        diff = points - points[cur]
        d = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        lo_new, hi_new = np.minimum(cur, idx), np.maximum(cur, idx)
        lo_old, hi_old = np.minimum(best_p, idx), np.maximum(best_p, idx)
        better = (d < best_d) | ((d == best_d) & ((lo_new < lo_old) |
                                                  ((lo_new == lo_old) & (hi_new < hi_old))))
        better &= ~in_tree
        best_d[better] = d[better]
        best_p[better] = cur
        cand = np.flatnonzero(~in_tree)
        lo_c = np.minimum(best_p[cand], cand)
        hi_c = np.maximum(best_p[cand], cand)
        v = cand[np.lexsort((hi_c, lo_c, best_d[cand]))[0]]
        out.append((min(v, best_p[v]), max(v, best_p[v])))
        in_tree[v] = True
        cur = v
    return np.array(out, dtype=np.intp).reshape(-1, 2)


def mst(points) -> GeoGraph:
    """Euclidean minimal spanning tree.

    In the plane Kruskal runs over the Delaunay edges (falling back to the
    complete graph for degenerate input); otherwise Prim on the complete graph.
    """
    points = as_points(points)
    n, d = points.shape
    if n < 2:
        return empty_graph(points, "mst")
    if d == 2 and n >= 3:
        try:
            tri = triangulate(points)
        except DegenerateConfiguration:
            tri = None
        if tri is not None and not tri.cocircular:
            return make_graph(points, _kruskal(points, tri.edges), kind="mst")
    if d == 2 and n <= 400:
        return make_graph(points, _kruskal(points, complete_pairs(n)), kind="mst")
    return make_graph(points, _prim(points), kind="mst")


# --------------------------------------------------------------------- kNN

def knn_graph(points, k: int, directed: bool = False) -> GeoGraph:
    """k-nearest-neighbour graph; undirected uses the and/or (union) rule."""
    points = as_points(points)
    n = len(points)
    if k < 1:
        raise ValueError("k must be >= 1")
    if n <= k:
        raise ValueError(f"knn graph needs more than k={k} points, got {n}")
    idx, _ = SpatialIndex(points).knn_all(k)
    src = np.repeat(np.arange(n), k)
    pairs = np.column_stack([src, idx.ravel()])
    return make_graph(points, pairs, directed, "knn", k=k)


# --------------------------------------------------------------------- SIG

def sig(points) -> GeoGraph:
    """Sphere of influence graph: balls of nearest-neighbour radius that touch."""
    points = as_points(points)
    n = len(points)
    if n < 2:
        raise ValueError("SIG needs at least 2 points")
    index = SpatialIndex(points)
    _, nnd = index.knn_all(1)
    r = nnd[:, 0]
    pairs = []
    # an edge satisfies |x-y| <= r_x + r_y <= 2 max(r_x, r_y): search from the larger ball
    for i in range(n):
        cand = index.range_query(points[i], 2.0 * r[i])
        cand = cand[cand != i]
        if len(cand) == 0:
            continue
        d = np.sqrt(np.sum((points[cand] - points[i]) ** 2, axis=1))
        hit = cand[d <= r[i] + r[cand]]
        pairs.extend((i, int(j)) for j in hit)
    return make_graph(points, np.array(pairs, dtype=np.intp).reshape(-1, 2), kind="sig")


# -------------------------------------------------------- proximity graphs

def _proximity_candidates(points: np.ndarray) -> np.ndarray:
    n, d = points.shape
    if d == 2 and n >= 3:
        try:
            tri = triangulate(points)
            if not tri.cocircular:
                return tri.edges
        except DegenerateConfiguration:
            pass
    return complete_pairs(n)


def gabriel(points) -> GeoGraph:
    """Gabriel graph: edge iff the open diametral ball of (x, y) is empty."""
    points = as_points(points)
    n = len(points)
    if n < 2:
        raise ValueError("Gabriel graph needs at least 2 points")
    index = SpatialIndex(points)
    keep = []
    for i, j in _proximity_candidates(points):
        x, y = points[i], points[j]
        rad = 0.5 * float(np.linalg.norm(x - y))
        cand = index._tree.query_ball_point(0.5 * (x + y), rad * (1 + 1e-9) + 1e-300)
        z = points[[c for c in cand if c != i and c != j]]
        # z is strictly inside the diametral ball iff the angle xzy is obtuse
        if len(z) == 0 or not np.any(np.einsum("ij,ij->i", x - z, y - z) < 0):
            keep.append((i, j))
    return make_graph(points, np.array(keep, dtype=np.intp).reshape(-1, 2), kind="gabriel")


def rng_graph(points) -> GeoGraph:
    """Relative neighbourhood graph: edge iff the open lune of (x, y) is empty."""
    points = as_points(points)
    n = len(points)
    if n < 2:
        raise ValueError("relative neighbourhood graph needs at least 2 points")
    index = SpatialIndex(points)
    keep = []
    for i, j in _proximity_candidates(points):
        x, y = points[i], points[j]
        dxy2 = float(np.sum((x - y) ** 2))
        cand = index._tree.query_ball_point(x, np.sqrt(dxy2) * (1 + 1e-9) + 1e-300)
        z = points[[c for c in cand if c != i and c != j]]
        if len(z) == 0:
            keep.append((i, j))
            continue
        dx2 = np.sum((z - x) ** 2, axis=1)
        dy2 = np.sum((z - y) ** 2, axis=1)
        if not np.any((dx2 < dxy2) & (dy2 < dxy2)):
            keep.append((i, j))
    return make_graph(points, np.array(keep, dtype=np.intp).reshape(-1, 2), kind="rng")


# ----------------------------------------------------------------- patterns

@dataclass(frozen=True)
class PatternSpec:
    """A small connected pattern graph: degree(m), star(m), or explicit edges."""

    kind: str
    m: int = 0
    n_vertices: int = 0
    pattern_edges: tuple = ()

    def __post_init__(self):
        if self.kind in ("degree", "star"):
            if self.m < 0:
                raise ValueError("m must be >= 0")
            return
        if self.kind != "explicit":
            raise ValueError(f"unknown pattern kind {self.kind!r}")
        if not 1 <= self.n_vertices <= 6:
            raise ValueError("explicit patterns are limited to 6 vertices")
        uf = UnionFind(self.n_vertices)
        for a, b in self.pattern_edges:
            if not (0 <= a < self.n_vertices and 0 <= b < self.n_vertices) or a == b:
                raise ValueError(f"bad pattern edge {(a, b)}")
            uf.union(a, b)
        if uf.components != 1:
            raise ValueError("pattern graph must be connected")

    @classmethod
    def explicit(cls, n_vertices: int, edges) -> "PatternSpec":
        edges = tuple(sorted({tuple(sorted((int(a), int(b)))) for a, b in edges}))
        return cls("explicit", n_vertices=n_vertices, pattern_edges=edges)

    @classmethod
    def triangle(cls) -> "PatternSpec":
        return cls.explicit(3, [(0, 1), (1, 2), (0, 2)])

    def adjacency(self) -> list[set]:
        adj = [set() for _ in range(self.n_vertices)]
        for a, b in self.pattern_edges:
            adj[a].add(b)
            adj[b].add(a)
        return adj

    def to_dict(self) -> dict:
        if self.kind == "explicit":
            return {"kind": "explicit", "n_vertices": self.n_vertices,
                    "edges": [list(e) for e in self.pattern_edges]}
        return {"kind": self.kind, "m": self.m}

    @classmethod
    def from_dict(cls, spec: dict) -> "PatternSpec":
        if spec["kind"] == "explicit":
            return cls.explicit(spec["n_vertices"], spec["edges"])
        if spec["kind"] == "triangle":
            return cls.triangle()
        return cls(spec["kind"], m=int(spec["m"]))


# ---------------------------------------------------------------- dispatch

GRAPH_KINDS = ("mst", "knn", "delaunay", "voronoi", "sig", "gabriel", "rng")


def build_graph(kind: str, points, k: int = 1, directed: bool = False,
                clip: Window | None = None):
    if kind == "mst":
        return mst(points)
    if kind == "knn":
        return knn_graph(points, k, directed)
    if kind == "delaunay":
        return delaunay(points)
    if kind == "voronoi":
        return delaunay_voronoi_2d(points, clip)
    if kind == "sig":
        return sig(points)
    if kind == "gabriel":
        return gabriel(points)
    if kind == "rng":
        return rng_graph(points)
    raise ValueError(f"unknown graph kind {kind!r}")


def incident_edges(graph: GeoGraph | VoronoiDiagram, vertex: int, mode: str = "all"):
    """Edges incident to ``vertex`` as ``(pairs, lengths)``.

    For a Voronoi diagram these are the boundary edges of the vertex's cell,
    indexed by their dual Delaunay pairs.
    """
    ids = graph.incident(vertex, mode)
    return graph.edges[ids], graph.lengths[ids]
