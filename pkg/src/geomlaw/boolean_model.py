"""Boolean model statistics for unions of closed balls.

A scene is the union of balls ``X_i + n^(-1/d) S_i`` with ``S_i`` a ball of
random radius at most ``K``.  Clumps are the connected components of the
intersection graph (tangent balls intersect).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations

import numpy as np

from .functionals import Xi, component_labels
from .graphs import GeoGraph, make_graph
from .point_process import MarkedPointSet, MarkSpec, RadiusDist, as_rng
from .spatial import SpatialIndex, as_points, unit_ball_volume

EXACT_MIS_LIMIT = 30
NERVE_CLIQUE_LIMIT = 20


class SupercriticalClump(RuntimeError):
    pass


@dataclass(eq=False)
class BooleanScene:
    centers: np.ndarray
    radii: np.ndarray
    bound: float            # largest possible (scaled) radius
    scale: float = 1.0      # shrink factor n^(-1/d) applied to the radius marks

    def __post_init__(self):
        self.centers = as_points(self.centers)
        self.radii = np.asarray(self.radii, dtype=float)
        if len(self.radii) != len(self.centers):
            raise ValueError("one radius per center")
        if np.any(self.radii <= 0) or np.any(self.radii > self.bound * (1 + 1e-12)):
            raise ValueError("radii must lie in (0, K]")

    @property
    def n(self) -> int:
        return len(self.centers)

    @property
    def dim(self) -> int:
        return self.centers.shape[1]

    @cached_property
    def intersection_graph(self) -> GeoGraph:
        pairs = SpatialIndex(self.centers).pairs_within(2.0 * self.bound)
        if len(pairs):
            d = np.linalg.norm(self.centers[pairs[:, 0]] - self.centers[pairs[:, 1]], axis=1)
            pairs = pairs[d <= self.radii[pairs[:, 0]] + self.radii[pairs[:, 1]]]
        return make_graph(self.centers, pairs, kind="intersection")

    @cached_property
    def labels(self) -> np.ndarray:
        return component_labels(self.intersection_graph)

    @cached_property
    def clumps(self) -> list[np.ndarray]:
        if self.n == 0:
            return []
        order = np.argsort(self.labels, kind="stable")
        bounds = np.flatnonzero(np.diff(self.labels[order])) + 1
        return np.split(order, bounds)

    @cached_property
    def _nbrs(self) -> list[set]:
        return self.intersection_graph.neighbor_sets()

    def to_csv(self, path, selected=None) -> None:
        sel = np.zeros(self.n, dtype=bool) if selected is None else np.asarray(selected)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for c, r, lab, s in zip(self.centers, self.radii, self.labels, sel):
                coords = ",".join(repr(float(v)) for v in c)
                fh.write(f"{coords},{float(r)!r},{int(lab)},{int(bool(s))}\n")


def build_scene(marked: MarkedPointSet, n_scale: float) -> BooleanScene:
    """Scene of balls ``x_i + n_scale^(-1/d) B(0; r_i)`` from radius marks."""
    if marked.radius is None:
        raise ValueError("scene needs radius marks")
    d = marked.points.shape[1] if len(marked.points) else 2
    shrink = float(n_scale) ** (-1.0 / d)
    bound = marked.radius_bound if marked.radius_bound is not None else float(
        np.max(marked.radius, initial=0.0))
    return BooleanScene(marked.points, marked.radius * shrink, bound * shrink, shrink)


def clump_counts(scene: BooleanScene) -> tuple[int, dict[int, int]]:
    """Total clump count U and the counts U_k of clumps of each order k."""
    sizes = [len(c) for c in scene.clumps]
    uk: dict[int, int] = {}
    for s in sizes:
        uk[s] = uk.get(s, 0) + 1
    return len(sizes), dict(sorted(uk.items()))


# ---------------------------------------------------------------- volume

def lens_area(r1: float, r2: float, d: float) -> float:
    """Area of the intersection of two disks with centre distance d."""
    if d >= r1 + r2:
        return 0.0
    if d <= abs(r1 - r2):
        return math.pi * min(r1, r2) ** 2
    a1 = r1 * r1 * math.acos((d * d + r1 * r1 - r2 * r2) / (2 * d * r1))
    a2 = r2 * r2 * math.acos((d * d + r2 * r2 - r1 * r1) / (2 * d * r2))
    k = 0.5 * math.sqrt((-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2))
    return a1 + a2 - k


def disk_union_area(centers: np.ndarray, radii: np.ndarray) -> float:
    """Exact area of a union of disks by Green's theorem over the uncovered arcs."""
    m = len(radii)
    total = 0.0
    for i in range(m):
        ci, ri = centers[i], radii[i]
        covered = []
        hidden = False
        for j in range(m):
            if j == i:
                continue
            dv = centers[j] - ci
            d = math.hypot(dv[0], dv[1])
            rj = radii[j]
            if d >= ri + rj:
                continue
            if d + ri <= rj:
                # disk i lies inside disk j; identical disks keep the lower index
                if d == 0 and ri == rj and i < j:
                    continue
                hidden = True
                break
            if d + rj <= ri:
                continue
            base = math.atan2(dv[1], dv[0])
            half = math.acos(max(-1.0, min(1.0, (ri * ri + d * d - rj * rj) / (2 * ri * d))))
            covered.append((base - half, base + half))
        if hidden:
            continue
        for a, b in _uncovered_arcs(covered):
            total += 0.5 * (ri * ri * (b - a)
                            + ci[0] * ri * (math.sin(b) - math.sin(a))
                            - ci[1] * ri * (math.cos(b) - math.cos(a)))
    return total


def _uncovered_arcs(covered):
    """Complement in [0, 2pi) of a union of angular intervals."""
    two_pi = 2 * math.pi
    if not covered:
        return [(0.0, two_pi)]
    segs = []
    for a, b in covered:
        width = min(b - a, two_pi)
        a %= two_pi
        b = a + width
        if b > two_pi:
            segs.append((a, two_pi))
            segs.append((0.0, b - two_pi))
        else:
            segs.append((a, b))
    segs.sort()
    out = []
    cur = 0.0
    for a, b in segs:
        if a > cur:
            out.append((cur, a))
        cur = max(cur, b)
    if cur < two_pi:
        out.append((cur, two_pi))
    return out


@dataclass
class VolumeResult:
    value: float
    stderr: float = 0.0
    method: str = "exact2d"


def volume(scene: BooleanScene, method: str = "exact2d", samples: int = 0,
           seed=0) -> VolumeResult:
    """Total volume of the union of balls.

    ``exact2d`` evaluates each planar clump exactly from its boundary arcs;
    ``montecarlo`` hit-counts uniform samples in each clump's bounding box,
    allocating samples in proportion to box volume.
    """
    if method == "exact2d":
        if scene.dim != 2:
            raise ValueError("exact2d volume requires d = 2")
        total = 0.0
        for c in scene.clumps:
            if len(c) == 1:
                total += math.pi * scene.radii[c[0]] ** 2
            else:
                total += disk_union_area(scene.centers[c], scene.radii[c])
        return VolumeResult(total)
    if method != "montecarlo":
        raise ValueError(f"unknown volume method {method!r}")
    if samples <= 0:
        raise ValueError("montecarlo volume needs a positive sample count")
    rng = as_rng(seed, "volume")
    boxes = []
    for c in scene.clumps:
        lo = np.min(scene.centers[c] - scene.radii[c][:, None], axis=0)
        hi = np.max(scene.centers[c] + scene.radii[c][:, None], axis=0)
        boxes.append((lo, hi, float(np.prod(hi - lo))))
    total_box = sum(b[2] for b in boxes)
    value, var = 0.0, 0.0
    for c, (lo, hi, vol) in zip(scene.clumps, boxes):
        m = max(2, int(round(samples * vol / total_box)))
        x = lo + (hi - lo) * rng.random((m, scene.dim))
        d2 = np.sum((x[:, None, :] - scene.centers[c][None, :, :]) ** 2, axis=2)
        p = np.mean(np.any(d2 <= scene.radii[c] ** 2, axis=1))
        value += vol * p
        var += vol * vol * p * (1 - p) / m
    return VolumeResult(value, math.sqrt(var), "montecarlo")


# ------------------------------------------------------- Euler characteristic

def _circle_points(c1, r1, c2, r2):
    dv = c2 - c1
    d = math.hypot(dv[0], dv[1])
    if d == 0 or d > r1 + r2 or d < abs(r1 - r2):
        return []
    a = (r1 * r1 - r2 * r2 + d * d) / (2 * d)
    h = math.sqrt(max(r1 * r1 - a * a, 0.0))
    base = c1 + a * dv / d
    perp = np.array([-dv[1], dv[0]]) / d
    return [base + h * perp, base - h * perp]


def disks_meet(centers: np.ndarray, radii: np.ndarray, tol: float = 1e-12) -> bool:
    """Whether closed disks have a common point.

    A nonempty intersection either is one of the disks (so contains its
    centre) or has a boundary vertex where two circles cross; both kinds of
    candidate are tested against every disk.
    """
    scale = max(1.0, float(np.max(radii)))
    cands = list(centers)
    for a, b in combinations(range(len(radii)), 2):
        cands.extend(_circle_points(centers[a], radii[a], centers[b], radii[b]))
    for p in cands:
        if np.all(np.linalg.norm(centers - p, axis=1) <= radii + tol * scale):
            return True
    return False


def nerve_simplices(scene: BooleanScene, clump: np.ndarray) -> list[tuple]:
    """Nonempty intersecting subsets of a clump (the nerve), as index tuples.

    By Helly's theorem in the plane a subset meets iff all its triples meet,
    so simplices are cliques whose triples all meet.
    """
    nbrs = scene._nbrs
    members = sorted(int(v) for v in clump)
    triple_cache: dict[tuple, bool] = {}

    def triple_ok(a, b, c):
        key = (a, b, c)
        if key not in triple_cache:
            idx = list(key)
            triple_cache[key] = disks_meet(scene.centers[idx], scene.radii[idx])
        return triple_cache[key]

    out = []

    def grow(simplex: list, cands: list):
        out.append(tuple(simplex))
        if len(simplex) > NERVE_CLIQUE_LIMIT:
            raise SupercriticalClump("supercritical clump: nerve clique exceeds budget")
        for pos, v in enumerate(cands):
            if all(v in nbrs[u] for u in simplex) and all(
                    triple_ok(*sorted((a, b, v))) for a, b in combinations(simplex, 2)):
                grow(simplex + [v], [w for w in cands[pos + 1:] if w in nbrs[v]])

    for pos, v in enumerate(members):
        grow([v], [w for w in members[pos + 1:] if w in nbrs[v]])
    return out


def euler_characteristic(scene: BooleanScene) -> int:
    if scene.dim != 2:
        raise ValueError("Euler characteristic is implemented for d = 2")
    chi = 0
    for c in scene.clumps:
        if len(c) == 1:
            chi += 1
            continue
        chi += sum((-1) ** (len(s) + 1) for s in nerve_simplices(scene, c))
    return chi


def euler_curvature_2d(scene: BooleanScene) -> tuple[int, float]:
    """Euler characteristic chi of the union and total curvature W = 2 pi chi."""
    chi = euler_characteristic(scene)
    return chi, 2 * math.pi * chi


# ------------------------------------------------------------------ packing

@dataclass
class PackingResult:
    selected: np.ndarray
    M: int
    exact: bool


def max_independent_set(nbrs: dict[int, set]) -> list[int]:
    """Exact maximum independent set by branch and bound on a small graph."""
    best: list = []

    def solve(cand: set, chosen: list):
        nonlocal best
        if len(chosen) + len(cand) <= len(best):
            return
        if not cand:
            best = list(chosen)
            return
        # vertices of degree <= 1 in the remaining graph can always be taken
        for v in sorted(cand):
            if len(nbrs[v] & cand) <= 1:
                solve(cand - nbrs[v] - {v}, chosen + [v])
                return
        v = max(sorted(cand), key=lambda u: len(nbrs[u] & cand))
        solve(cand - nbrs[v] - {v}, chosen + [v])
        solve(cand - {v}, chosen)

    solve(set(nbrs), [])
    return sorted(best)


def _greedy_independent_set(nbrs: dict[int, set]) -> list[int]:
    cand = set(nbrs)
    chosen = []
    while cand:
        v = min(sorted(cand), key=lambda u: len(nbrs[u] & cand))
        chosen.append(v)
        cand -= nbrs[v] | {v}
    return sorted(chosen)


def offline_packing(scene: BooleanScene) -> PackingResult:
    """Maximal number of pairwise disjoint balls, solved clump by clump.

    Clump vertices are visited in lexicographic order of their centres so the
    chosen set does not depend on input order or on translations.
    """
    selected = np.zeros(scene.n, dtype=bool)
    exact = True
    nbrs = scene._nbrs
    for c in scene.clumps:
        if len(c) == 1:
            selected[c[0]] = True
            continue
        pts = scene.centers[c]
        order = np.lexsort(pts.T[::-1])
        local_of = {int(c[o]): pos for pos, o in enumerate(order)}
        sub = {local_of[int(v)]: {local_of[w] for w in nbrs[int(v)]} for v in c}
        if len(c) <= EXACT_MIS_LIMIT:
            chosen = max_independent_set(sub)
        else:
            chosen = _greedy_independent_set(sub)
            exact = False
        for pos in chosen:
            selected[int(c[order[pos]])] = True
    return PackingResult(selected, int(selected.sum()), exact)


# ------------------------------------------------------------ functionals

def _scene_of(cfg: MarkedPointSet) -> BooleanScene:
    bound = cfg.radius_bound if cfg.radius_bound is not None else float(np.max(cfg.radius))
    return BooleanScene(cfg.points, cfg.radius, bound)


def _clump_of(scene: BooleanScene, i: int) -> np.ndarray:
    return np.flatnonzero(scene.labels == scene.labels[i])


def _members_key(scene: BooleanScene, members) -> frozenset:
    return frozenset((tuple(scene.centers[j]), float(scene.radii[j])) for j in members)


def clump_xi(radius: RadiusDist, order: int | None = None) -> Xi:
    """Reciprocal clump order (sums to U), or 1/k on clumps of order k (sums to U_k)."""
    def per_point(scene):
        sizes = np.bincount(scene.labels)[scene.labels]
        if order is None:
            return 1.0 / sizes
        return np.where(sizes == order, 1.0 / order, 0.0)

    def local(cfg, i):
        scene = _scene_of(cfg)
        members = _clump_of(scene, i)
        return float(per_point(scene)[i]), _members_key(scene, members)
    name = "clump_reciprocal" if order is None else f"clump_order[{order}]"
    return Xi(name, lambda cfg: per_point(_scene_of(cfg)), local, homogeneity=None,
              marks=MarkSpec(radius=radius), params={"order": order})


def clump_volume_xi(radius: RadiusDist) -> Xi:
    """Clump volume shared equally among its balls (sums to the union volume)."""
    def per_point(scene):
        out = np.empty(scene.n)
        for c in scene.clumps:
            v = math.pi * scene.radii[c[0]] ** 2 if len(c) == 1 else \
                disk_union_area(scene.centers[c], scene.radii[c])
            out[c] = v / len(c)
        return out

    def local(cfg, i):
        scene = _scene_of(cfg)
        members = _clump_of(scene, i)
        v = disk_union_area(scene.centers[members], scene.radii[members])
        return v / len(members), _members_key(scene, members)
    return Xi("clump_volume", lambda cfg: per_point(_scene_of(cfg)), local,
              marks=MarkSpec(radius=radius))


def curvature_xi(radius: RadiusDist) -> Xi:
    """Share of 2 pi chi carried by each disk: nerve simplices split evenly among members."""
    def per_point(scene):
        out = np.zeros(scene.n)
        for c in scene.clumps:
            if len(c) == 1:
                out[c[0]] = 2 * math.pi
                continue
            for s in nerve_simplices(scene, c):
                w = 2 * math.pi * (-1) ** (len(s) + 1) / len(s)
                for v in s:
                    out[v] += w
        return out

    def local(cfg, i):
        scene = _scene_of(cfg)
        return float(per_point(scene)[i]), _members_key(scene, _clump_of(scene, i))
    # values can be negative, so this is used through euler_curvature_2d sums only
    return Xi("curvature_share", lambda cfg: per_point(_scene_of(cfg)), local,
              marks=MarkSpec(radius=radius))


def packing_xi(radius: RadiusDist) -> Xi:
    """Indicator that the ball is in the chosen maximum disjoint subfamily."""
    def local(cfg, i):
        scene = _scene_of(cfg)
        sel = offline_packing(scene).selected
        return float(sel[i]), _members_key(scene, _clump_of(scene, i))
    return Xi("offline_packing", lambda cfg: offline_packing(_scene_of(cfg)).selected.astype(float),
              local, marks=MarkSpec(radius=radius))


def ball_volume_scale(d: int, r: float) -> float:
    return unit_ball_volume(d) * r**d
