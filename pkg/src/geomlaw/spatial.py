"""Geometric primitives and a kd-tree backed spatial index.

All balls are closed, distances are Euclidean, and ties between equidistant
points are broken by lexicographic order of coordinates (then by index, for
exact duplicates).  Distances are always recomputed with :func:`distances`
so that every query agrees bit-for-bit with a linear scan.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

# relative slack used to widen tree queries before exact filtering
_SLACK = 1e-9


def as_points(points, d: int | None = None) -> np.ndarray:
    """Coerce ``points`` into a float array of shape (n, d)."""
    arr = np.asarray(points, dtype=float)
    if arr.size == 0:
        if arr.ndim == 2:
            return arr.reshape(0, arr.shape[1])
        return np.empty((0, d if d is not None else 2))
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1) if d == 1 else arr.reshape(1, -1)
    if arr.ndim != 2:
        raise ValueError(f"points must be 2-dimensional, got shape {arr.shape}")
    if d is not None and arr.shape[1] != d:
        raise ValueError(f"expected dimension {d}, got {arr.shape[1]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("points must have finite coordinates")
    return arr


def distances(points: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Euclidean distances from every row of ``points`` to ``q``."""
    diff = points - q
    return np.sqrt(np.einsum("ij,ij->i", diff, diff))


def lex_order(points: np.ndarray, dist: np.ndarray | None = None,
              index: np.ndarray | None = None) -> np.ndarray:
    """Permutation sorting by (dist, x0, x1, ..., index)."""
    n, d = points.shape
    if index is None:
        index = np.arange(n)
    keys = [index] + [points[:, j] for j in range(d - 1, -1, -1)]
    if dist is not None:
        keys.append(dist)
    return np.lexsort(keys)


def unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


@dataclass(frozen=True)
class Window:
    """Axis-aligned box ``[lo, hi]`` or closed ball ``B(center; radius)``."""

    kind: str
    lo: tuple = ()
    hi: tuple = ()
    center: tuple = ()
    radius: float = 0.0

    def __post_init__(self):
        if self.kind == "box":
            lo, hi = np.asarray(self.lo, float), np.asarray(self.hi, float)
            if lo.shape != hi.shape or lo.ndim != 1 or lo.size == 0:
                raise ValueError("box bounds must be equal-length vectors")
            if not np.all(hi > lo) or not np.all(np.isfinite(hi - lo)):
                raise ValueError("box must have nonempty interior and finite volume")
        elif self.kind == "ball":
            if not (self.radius > 0 and math.isfinite(self.radius)):
                raise ValueError("ball radius must be positive and finite")
            if len(self.center) == 0:
                raise ValueError("ball needs a center")
        else:
            raise ValueError(f"unknown window kind {self.kind!r}")

    @classmethod
    def box(cls, lo, hi) -> "Window":
        return cls("box", lo=tuple(float(v) for v in lo), hi=tuple(float(v) for v in hi))

    @classmethod
    def unit_box(cls, d: int) -> "Window":
        return cls.box([0.0] * d, [1.0] * d)

    @classmethod
    def ball(cls, center, radius: float) -> "Window":
        return cls("ball", center=tuple(float(v) for v in center), radius=float(radius))

    @property
    def dim(self) -> int:
        return len(self.lo) if self.kind == "box" else len(self.center)

    @property
    def volume(self) -> float:
        if self.kind == "box":
            return float(np.prod(np.subtract(self.hi, self.lo)))
        return unit_ball_volume(self.dim) * self.radius ** self.dim

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        """Bounding box (lo, hi) of the window."""
        if self.kind == "box":
            return np.array(self.lo), np.array(self.hi)
        c = np.array(self.center)
        return c - self.radius, c + self.radius

    def contains(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, float))
        if self.kind == "box":
            return np.all((pts >= self.lo) & (pts <= self.hi), axis=1)
        return distances(pts, np.array(self.center)) <= self.radius

    def expanded(self, margin: float) -> "Window":
        if self.kind == "box":
            return Window.box(np.subtract(self.lo, margin), np.add(self.hi, margin))
        return Window.ball(self.center, self.radius + margin)

    def sample_uniform(self, rng: np.random.Generator, m: int) -> np.ndarray:
        d = self.dim
        if self.kind == "box":
            lo, hi = self.bounds()
            return lo + (hi - lo) * rng.random((m, d))
        # direction x radius^(1/d) gives uniform placement in the ball
        g = rng.standard_normal((m, d))
        norms = np.linalg.norm(g, axis=1, keepdims=True)
        norms[norms == 0] = 1.0
        r = self.radius * rng.random((m, 1)) ** (1.0 / d)
        return np.array(self.center) + g / norms * r

    def to_dict(self) -> dict:
        if self.kind == "box":
            return {"kind": "box", "lo": list(self.lo), "hi": list(self.hi)}
        return {"kind": "ball", "center": list(self.center), "radius": self.radius}

    @classmethod
    def from_dict(cls, spec: dict) -> "Window":
        if spec["kind"] == "box":
            return cls.box(spec["lo"], spec["hi"])
        if spec["kind"] == "ball":
            return cls.ball(spec["center"], spec["radius"])
        raise ValueError(f"unknown window kind {spec['kind']!r}")


@dataclass
class SpatialIndex:
    """Immutable index over a point set answering kNN and closed-ball queries."""

    points: np.ndarray
    _tree: cKDTree | None = field(default=None, repr=False)

    def __post_init__(self):
        self.points = as_points(self.points)
        self.points.setflags(write=False)
        if len(self.points):
            self._tree = cKDTree(self.points)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def _exact_sorted(self, cand: np.ndarray, q: np.ndarray):
        cand = np.asarray(cand, dtype=np.intp)
        dist = distances(self.points[cand], q)
        order = lex_order(self.points[cand], dist, cand)
        return cand[order], dist[order]

    def k_nearest(self, query, k: int, exclude_self: bool = False,
                  exclude: int | None = None):
        """The ``k`` nearest points to ``query`` as ``(indices, distances)``.

        Results are ordered by (distance, lexicographic coordinates).  With
        ``exclude_self`` one point coinciding with the query is skipped;
        ``exclude`` skips a specific index instead.
        """
        if k < 1:
            raise ValueError("k must be >= 1")
        q = np.asarray(query, dtype=float).reshape(-1)
        n = len(self.points)
        if exclude_self and exclude is None:
            hits = self.range_query(q, 0.0)
            if len(hits) == 0:
                raise ValueError("exclude_self requires the query to be a point of the set")
            exclude = int(hits[0])
        need = k + (exclude is not None)
        if need > n:
            raise ValueError("insufficient points")
        _, idx = self._tree.query(q, k=need)
        idx = np.atleast_1d(idx)
        dk = distances(self.points[idx], q).max()
        cand = self._tree.query_ball_point(q, dk * (1 + _SLACK) + 1e-300)
        cand, dist = self._exact_sorted(cand, q)
        if exclude is not None:
            keep = cand != exclude
            cand, dist = cand[keep], dist[keep]
        return cand[:k], dist[:k]

    def range_query(self, center, radius: float) -> np.ndarray:
        """Indices of all points in the closed ball, ordered by (distance, lex)."""
        if radius < 0:
            raise ValueError("radius must be >= 0")
        if len(self.points) == 0:
            return np.empty(0, dtype=np.intp)
        q = np.asarray(center, dtype=float).reshape(-1)
        cand = self._tree.query_ball_point(q, radius * (1 + _SLACK) + 1e-300)
        cand, dist = self._exact_sorted(cand, q)
        return cand[dist <= radius]

    def knn_all(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        """k nearest neighbours of every indexed point, excluding itself.

        Returns ``(idx, dist)`` of shape (n, k).  A vectorised tree query is
        accepted for a row only when the k-th and (k+1)-th distances are
        clearly separated; other rows are resolved one by one with the exact
        tie rule.
        """
        n = len(self.points)
        if k + 1 > n:
            raise ValueError("insufficient points")
        idx = np.empty((n, k), dtype=np.intp)
        dist = np.empty((n, k))
        slow = np.ones(n, dtype=bool)
        if k + 2 <= n:
            _, nb = self._tree.query(self.points, k=k + 2)
            d_exact = np.linalg.norm(self.points[nb] - self.points[:, None, :], axis=2)
            is_self = nb == np.arange(n)[:, None]
            has_self = is_self.any(axis=1)
            d_masked = np.where(is_self, np.inf, d_exact)
            order = np.argsort(d_masked, axis=1, kind="stable")
            nb_s = np.take_along_axis(nb, order, axis=1)[:, : k + 1]
            d_s = np.take_along_axis(d_masked, order, axis=1)[:, : k + 1]
            # no ties among the first k+1 and a clear gap after the k-th
            gaps = np.diff(d_s, axis=1) > _SLACK * np.maximum(d_s[:, 1:], 1e-300)
            ok = has_self & gaps.all(axis=1) & (d_s[:, 0] > 0)
            idx[ok] = nb_s[ok, :k]
            dist[ok] = d_s[ok, :k]
            slow = ~ok
        for i in np.flatnonzero(slow):
            idx[i], dist[i] = self.k_nearest(self.points[i], k, exclude=int(i))
        return idx, dist

    def pairs_within(self, r: float) -> np.ndarray:
        """All index pairs (i<j) at distance <= r, sorted lexicographically."""
        if len(self.points) < 2:
            return np.empty((0, 2), dtype=np.intp)
        pairs = self._tree.query_pairs(r * (1 + _SLACK) + 1e-300, output_type="ndarray")
        if len(pairs) == 0:
            return np.empty((0, 2), dtype=np.intp)
        pairs = np.sort(pairs, axis=1)
        d = np.linalg.norm(self.points[pairs[:, 0]] - self.points[pairs[:, 1]], axis=1)
        pairs = pairs[d <= r]
        return pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]


def build_index(points) -> SpatialIndex:
    return SpatialIndex(as_points(points))


def k_nearest(index: SpatialIndex, query, k: int, exclude_self: bool = False):
    return index.k_nearest(query, k, exclude_self=exclude_self)


def range_query(index: SpatialIndex, center, radius: float) -> np.ndarray:
    return index.range_query(center, radius)


def write_points_csv(path, points, header: bool = False) -> None:
    pts = as_points(points)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if header:
            fh.write(",".join(f"x{j}" for j in range(pts.shape[1])) + "\n")
        for row in pts:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def read_points_csv(path) -> np.ndarray:
    """Read a point CSV; a non-numeric first row is taken as a header."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    rows = [ln for ln in lines if ln.strip()]
    if rows:
        try:
            [float(v) for v in rows[0].split(",")]
        except ValueError:
            rows = rows[1:]
    if not rows:
        return np.empty((0, 2))
    return as_points([[float(v) for v in r.split(",")] for r in rows])
