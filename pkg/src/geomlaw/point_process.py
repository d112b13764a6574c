"""Point process samplers: binomial, Poisson, marks, and the binomial/Cox coupling.

Randomness comes from counter-based Philox streams keyed by
``(master_seed, purpose tag, replicate index)`` so that results do not depend
on the order in which replicates are executed.
"""
from __future__ import annotations

import math
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import erf

from .spatial import Window, as_points, distances, unit_ball_volume

SeedLike = int | np.random.Generator


def stream(master_seed: int, tag: str, index: int = 0) -> np.random.Generator:
    """Independent generator for ``(master_seed, tag, index)``."""
    ss = np.random.SeedSequence(entropy=int(master_seed) % 2**64,
                                spawn_key=(zlib.crc32(tag.encode()), int(index)))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(master_seed: int, tag: str, index: int = 0) -> int:
    """A 63-bit integer seed for replicate ``index`` of the run ``master_seed``."""
    ss = np.random.SeedSequence(entropy=int(master_seed) % 2**64,
                                spawn_key=(zlib.crc32(tag.encode()), int(index)))
    return int(ss.generate_state(2, np.uint32).view(np.uint64)[0] >> np.uint64(1))


def as_rng(seed: SeedLike, tag: str, index: int = 0) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return stream(seed, tag, index)


# ---------------------------------------------------------------- densities

class Density:
    """A bounded probability density with a bounding box and a known sup."""

    kind = "abstract"

    def pdf(self, x) -> np.ndarray:
        raise NotImplementedError

    @property
    def box(self) -> Window:
        raise NotImplementedError

    @property
    def sup_f(self) -> float:
        raise NotImplementedError

    @property
    def dim(self) -> int:
        return self.box.dim

    def power_integral(self, a: float) -> float | None:
        """Closed form of int f^a, when available (subclasses override)."""
        return None

    def to_dict(self) -> dict:
        raise NotImplementedError

    def _check(self):
        if not (self.sup_f > 0 and math.isfinite(self.sup_f)):
            raise ValueError("density needs 0 < sup_f < inf")


@dataclass
class UniformBox(Density):
    window: Window
    kind = "uniform_box"

    def __post_init__(self):
        if self.window.kind != "box":
            raise ValueError("uniform_box needs a box window")
        self._check()

    @property
    def box(self):
        return self.window

    @property
    def sup_f(self):
        return 1.0 / self.window.volume

    def pdf(self, x):
        x = np.atleast_2d(np.asarray(x, float))
        return np.where(self.window.contains(x), self.sup_f, 0.0)

    def power_integral(self, a: float) -> float:
        v = self.window.volume
        return v ** (1.0 - a)

    def to_dict(self):
        return {"kind": self.kind, "lo": list(self.window.lo), "hi": list(self.window.hi)}


def _polygon_area(vertices: np.ndarray) -> float:
    x, y = vertices[:, 0], vertices[:, 1]
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def points_in_polygon(points: np.ndarray, vertices: np.ndarray) -> np.ndarray:
    """Even-odd rule point-in-polygon test, vectorised over points."""
    x, y = points[:, 0][:, None], points[:, 1][:, None]
    x0, y0 = vertices[:, 0], vertices[:, 1]
    x1, y1 = np.roll(x0, -1), np.roll(y0, -1)
    crosses = (y0 > y) != (y1 > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xint = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
    return (np.count_nonzero(crosses & (x < xint), axis=1) % 2) == 1


@dataclass
class UniformPolygon(Density):
    vertices: np.ndarray
    kind = "uniform_polygon"

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, float)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 2 or len(self.vertices) < 3:
            raise ValueError("polygon needs >= 3 planar vertices")
        self.area = _polygon_area(self.vertices)
        if self.area <= 0:
            raise ValueError("degenerate polygon")
        self._check()

    @property
    def box(self):
        return Window.box(self.vertices.min(axis=0), self.vertices.max(axis=0))

    @property
    def sup_f(self):
        return 1.0 / self.area

    def pdf(self, x):
        x = np.atleast_2d(np.asarray(x, float))
        return np.where(points_in_polygon(x, self.vertices), self.sup_f, 0.0)

    def power_integral(self, a: float) -> float:
        return self.area ** (1.0 - a)

    def to_dict(self):
        return {"kind": self.kind, "vertices": self.vertices.tolist()}


@dataclass
class PiecewiseGrid(Density):
    """Piecewise-constant density on a regular grid over a box.

    ``values[i0, i1, ...]`` is the density on the cell whose index along
    axis ``j`` is ``i_j``.
    """

    window: Window
    values: np.ndarray
    kind = "piecewise_grid"

    def __post_init__(self):
        self.values = np.asarray(self.values, float)
        if self.values.ndim != self.window.dim:
            raise ValueError("grid values must have one axis per dimension")
        if np.any(self.values < 0) or not np.all(np.isfinite(self.values)):
            raise ValueError("grid values must be finite and nonnegative")
        lo, hi = self.window.bounds()
        self.cell = (hi - lo) / np.array(self.values.shape)
        mass = self.values.sum() * float(np.prod(self.cell))
        if abs(mass - 1.0) > 1e-6:
            raise ValueError(f"grid density integrates to {mass}, not 1")
        self._check()

    @classmethod
    def from_masses(cls, window: Window, masses) -> "PiecewiseGrid":
        masses = np.asarray(masses, float)
        lo, hi = window.bounds()
        cell_vol = float(np.prod((hi - lo) / np.array(masses.shape)))
        return cls(window, masses / masses.sum() / cell_vol)

    @property
    def box(self):
        return self.window

    @property
    def sup_f(self):
        return float(self.values.max())

    def cell_index(self, x) -> np.ndarray:
        lo, _ = self.window.bounds()
        idx = np.floor((x - lo) / self.cell).astype(np.intp)
        # the upper faces belong to the last cell
        return np.minimum(idx, np.array(self.values.shape) - 1)

    def pdf(self, x):
        x = np.atleast_2d(np.asarray(x, float))
        out = np.zeros(len(x))
        inside = self.window.contains(x)
        if inside.any():
            idx = self.cell_index(x[inside])
            out[inside] = self.values[tuple(idx.T)]
        return out

    def power_integral(self, a: float) -> float:
        v = self.values[self.values > 0]
        return float(np.sum(v ** a) * np.prod(self.cell))

    def to_dict(self):
        return {"kind": self.kind, "lo": list(self.window.lo), "hi": list(self.window.hi),
                "values": self.values.tolist()}


@dataclass
class TruncatedGaussian(Density):
    """Isotropic Gaussian restricted to a box and renormalised."""

    mean: np.ndarray
    sigma: float
    window: Window
    kind = "truncated_gaussian"

    def __post_init__(self):
        self.mean = np.asarray(self.mean, float)
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.mean.shape != (self.window.dim,):
            raise ValueError("mean dimension mismatch")
        lo, hi = self.window.bounds()
        s = self.sigma * math.sqrt(2.0)
        self._mass = float(np.prod(0.5 * (erf((hi - self.mean) / s) - erf((lo - self.mean) / s))))
        if self._mass <= 0:
            raise ValueError("gaussian has no mass in the box")
        self._check()

    @property
    def box(self):
        return self.window

    def _raw(self, x):
        d = self.window.dim
        r2 = np.sum((x - self.mean) ** 2, axis=1)
        return np.exp(-0.5 * r2 / self.sigma**2) / ((2 * math.pi) ** (d / 2) * self.sigma**d)

    @property
    def sup_f(self):
        lo, hi = self.window.bounds()
        nearest = np.clip(self.mean, lo, hi)[None, :]
        return float(self._raw(nearest)[0] / self._mass)

    def pdf(self, x):
        x = np.atleast_2d(np.asarray(x, float))
        return np.where(self.window.contains(x), self._raw(x) / self._mass, 0.0)

    def to_dict(self):
        return {"kind": self.kind, "mean": self.mean.tolist(), "sigma": self.sigma,
                "lo": list(self.window.lo), "hi": list(self.window.hi)}


def read_raster_csv(path) -> np.ndarray:
    """Grid raster CSV: row r holds the cells with axis-1 index r, columns run along axis 0."""
    rows = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln.strip()]
    grid = np.array([[float(v) for v in r.split(",")] for r in rows])
    return grid.T


def density_from_dict(spec: dict, base_dir: Path | None = None) -> Density:
    kind = spec["kind"]
    if kind == "uniform_box":
        return UniformBox(Window.box(spec["lo"], spec["hi"]))
    if kind == "uniform_polygon":
        return UniformPolygon(np.asarray(spec["vertices"], float))
    if kind == "piecewise_grid":
        window = Window.box(spec["lo"], spec["hi"])
        if "raster" in spec:
            path = Path(spec["raster"])
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            values = read_raster_csv(path)
        else:
            values = np.asarray(spec["values"] if "values" in spec else spec["masses"], float)
        if "masses" in spec and "values" not in spec and "raster" not in spec:
            return PiecewiseGrid.from_masses(window, values)
        return PiecewiseGrid(window, values)
    if kind == "truncated_gaussian":
        return TruncatedGaussian(np.asarray(spec["mean"], float), float(spec["sigma"]),
                                 Window.box(spec["lo"], spec["hi"]))
    raise ValueError(f"unknown density kind {kind!r}")


# ----------------------------------------------------------------- samplers

@dataclass
class RejectionStats:
    proposed: int = 0
    accepted: int = 0

    @property
    def rate(self) -> float:
        return self.accepted / self.proposed if self.proposed else float("nan")


def rejection_sample(density: Density, n: int, rng: np.random.Generator,
                     stats: RejectionStats | None = None) -> np.ndarray:
    """``n`` i.i.d. draws from ``density`` using its box and sup_f as envelope."""
    box = density.box
    d = box.dim
    out = np.empty((0, d))
    expected_rate = 1.0 / (density.sup_f * box.volume)
    while len(out) < n:
        need = n - len(out)
        m = int(math.ceil(need / expected_rate * 1.1)) + 16
        x = box.sample_uniform(rng, m)
        u = rng.random(m) * density.sup_f
        acc = u < density.pdf(x)
        if stats is not None:
            # count proposals only up to the last one actually used
            used = np.flatnonzero(acc)
            last = used[need - 1] + 1 if len(used) >= need else m
            stats.proposed += int(last)
            stats.accepted += int(min(len(used), need))
        out = np.vstack([out, x[acc][:need]])
    return out


def sample_binomial(density: Density, n: int, seed: SeedLike,
                    stats: RejectionStats | None = None) -> np.ndarray:
    """The binomial process: ``n`` i.i.d. points with density ``f``."""
    if n < 0:
        raise ValueError("n must be >= 0")
    rng = as_rng(seed, "positions")
    return rejection_sample(density, n, rng, stats)


def sample_poisson(tau: float, window: Window, seed: SeedLike,
                   with_origin: bool = False) -> np.ndarray:
    """Homogeneous Poisson process of intensity ``tau`` restricted to ``window``.

    With ``with_origin`` the origin is appended as the last row.
    """
    if not tau > 0:
        raise ValueError("tau must be positive")
    d = window.dim
    if with_origin and not window.contains(np.zeros((1, d)))[0]:
        raise ValueError("window must contain the origin")
    rng = as_rng(seed, "poisson")
    count = rng.poisson(tau * window.volume)
    pts = window.sample_uniform(rng, count)
    if with_origin:
        pts = np.vstack([pts, np.zeros((1, d))])
    return pts


# -------------------------------------------------------------------- marks

@dataclass(frozen=True)
class RadiusDist:
    """Bounded radius distribution: constant, uniform(a, b) or discrete."""

    kind: str = "constant"
    params: tuple = (1.0,)
    probs: tuple = ()

    def __post_init__(self):
        if self.kind not in ("constant", "uniform", "discrete"):
            raise ValueError(f"radius distribution {self.kind!r} is not uniformly bounded "
                             "or not supported")
        vals = np.asarray(self.params, float)
        if not np.all(np.isfinite(vals)) or np.any(vals <= 0) and self.kind != "uniform":
            raise ValueError("radius distribution must be bounded with positive values")
        if self.kind == "uniform":
            a, b = self.params
            if not (0 <= a < b < math.inf):
                raise ValueError("uniform radius needs 0 <= a < b < inf")
        if self.kind == "discrete" and len(self.probs) != len(self.params):
            raise ValueError("discrete radius needs one probability per value")

    @property
    def bound(self) -> float:
        return float(max(self.params))

    def sample(self, rng: np.random.Generator, m: int) -> np.ndarray:
        if self.kind == "constant":
            return np.full(m, float(self.params[0]))
        if self.kind == "uniform":
            a, b = self.params
            # (a, b]: radii must be strictly positive
            return b - (b - a) * rng.random(m)
        p = np.asarray(self.probs, float)
        return rng.choice(np.asarray(self.params, float), size=m, p=p / p.sum())

    def mean_power(self, p: float) -> float:
        """E[R^p], used for intensity/coverage calculations."""
        if self.kind == "constant":
            return float(self.params[0]) ** p
        if self.kind == "uniform":
            a, b = self.params
            return (b ** (p + 1) - a ** (p + 1)) / ((p + 1) * (b - a))
        v = np.asarray(self.params, float)
        w = np.asarray(self.probs, float)
        return float(np.sum(w / w.sum() * v**p))

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "params": list(self.params)}
        if self.probs:
            out["probs"] = list(self.probs)
        return out

    @classmethod
    def from_dict(cls, spec: dict) -> "RadiusDist":
        return cls(spec["kind"], tuple(spec.get("params", (1.0,))), tuple(spec.get("probs", ())))


@dataclass
class MarkedPointSet:
    """Points with optional i.i.d. arrival-time and radius marks."""

    points: np.ndarray
    arrival: np.ndarray | None = None
    radius: np.ndarray | None = None
    radius_bound: float | None = None

    def __len__(self):
        return len(self.points)

    def subset(self, keep) -> "MarkedPointSet":
        return MarkedPointSet(self.points[keep],
                              None if self.arrival is None else self.arrival[keep],
                              None if self.radius is None else self.radius[keep],
                              self.radius_bound)

    def concat(self, other: "MarkedPointSet") -> "MarkedPointSet":
        def cat(a, b):
            return None if a is None else np.concatenate([a, b])
        return MarkedPointSet(np.vstack([self.points, other.points]),
                              cat(self.arrival, other.arrival),
                              cat(self.radius, other.radius), self.radius_bound)


@dataclass(frozen=True)
class MarkSpec:
    """Which marks to draw: arrival times, radii, or both."""

    arrival: bool = False
    radius: RadiusDist | None = None

    def draw(self, points: np.ndarray, rng: np.random.Generator) -> MarkedPointSet:
        m = len(points)
        arrival = rng.random(m) if self.arrival else None
        radius = self.radius.sample(rng, m) if self.radius is not None else None
        bound = self.radius.bound if self.radius is not None else None
        return MarkedPointSet(points, arrival, radius, bound)


def attach_marks(points, mark_kind: str | MarkSpec, seed: SeedLike,
                 radius: RadiusDist | None = None) -> MarkedPointSet:
    """Attach i.i.d. marks drawn from a stream independent of the positions."""
    points = as_points(points)
    if isinstance(mark_kind, MarkSpec):
        spec = mark_kind
    elif mark_kind == "arrival":
        spec = MarkSpec(arrival=True)
    elif mark_kind == "radius":
        if radius is None:
            raise ValueError("radius marks need a RadiusDist")
        spec = MarkSpec(radius=radius)
    else:
        raise ValueError(f"unknown mark kind {mark_kind!r}")
    return spec.draw(points, as_rng(seed, "marks"))


# ----------------------------------------------------------------- coupling

@dataclass
class CoupledPair:
    """Rescaled binomial sample and Cox sample around the same anchor, clipped to B(0;K)."""

    rescaled_binomial: np.ndarray
    cox: np.ndarray
    anchor: np.ndarray
    anchor_density: float
    n_poisson: int = 0
    changed: np.ndarray | None = None   # discarded or added points, rescaled

    @property
    def matched(self) -> bool:
        a, b = self.rescaled_binomial, self.cox
        if a.shape != b.shape:
            return False
        if len(a) == 0:
            return True
        ka = a[np.lexsort(a.T[::-1])]
        kb = b[np.lexsort(b.T[::-1])]
        return bool(np.array_equal(ka, kb))


def sample_coupled_pair(density: Density, n: int, K: float, seed: SeedLike) -> CoupledPair:
    """Couple ``n^(1/d)(X'_{n-1} - X)`` and the Cox process ``H_n`` through one
    Poisson process on ``R^d x [0, n sup f]``.

    The driving process lives on the density's box enlarged by
    ``K n^(-1/d)``, which covers every point that can reach ``B(0;K)`` after
    rescaling.  The time axis is cut at ``n sup f``; no retained point is
    lost because every threshold ``n f(.)`` lies below it.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if not K > 0:
        raise ValueError("K must be positive")
    d = density.dim
    scale = n ** (1.0 / d)
    anchor = rejection_sample(density, 1, as_rng(seed, "anchor"))[0]
    f_anchor = float(density.pdf(anchor[None, :])[0])

    region = density.box.expanded(K / scale)
    t_max = n * density.sup_f
    rng = as_rng(seed, "driving")
    m = rng.poisson(region.volume * t_max)
    xs = region.sample_uniform(rng, m)
    ts = rng.random(m) * t_max

    in_pn = ts <= n * density.pdf(xs)
    n_poisson = int(in_pn.sum())
    kept = xs[in_pn]
    changed = np.empty((0, d))
    if n_poisson > n - 1:
        # Fisher-Yates selection of the points to keep
        perm = as_rng(seed, "discard").permutation(n_poisson)
        changed = kept[perm[n - 1:]]
        kept = kept[np.sort(perm[: n - 1])]
    elif n_poisson < n - 1:
        changed = rejection_sample(density, n - 1 - n_poisson, as_rng(seed, "augment"))
        kept = np.vstack([kept, changed])

    binom = (kept - anchor) * scale
    cox = (xs[ts <= n * f_anchor] - anchor) * scale
    origin = np.zeros(d)
    binom = binom[distances(binom, origin) <= K]
    cox = cox[distances(cox, origin) <= K]
    return CoupledPair(binom, cox, anchor, f_anchor, n_poisson, (changed - anchor) * scale)


def ball_volume(d: int, r: float) -> float:
    return unit_ball_volume(d) * r**d
