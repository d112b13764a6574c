"""Random sequential (on-line) packing of equal balls of volume 1/n."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from .functionals import Xi
from .point_process import (Density, MarkedPointSet, MarkSpec, attach_marks, derive_seed,
                            sample_binomial)
from .spatial import as_points, unit_ball_volume


@dataclass
class RsaResult:
    packed: np.ndarray   # per ball, in input order
    N: int
    order: np.ndarray    # arrival order used for the scan


def rsa_radius(n: int, d: int) -> float:
    """Radius of a ball of volume 1/n."""
    return (n * unit_ball_volume(d)) ** (-1.0 / d)


def arrival_order(points: np.ndarray, arrival: np.ndarray) -> np.ndarray:
    """Indices sorted by arrival time; exact ties fall back to coordinate order."""
    keys = [points[:, j] for j in range(points.shape[1] - 1, -1, -1)]
    return np.lexsort(keys + [arrival])


def rsa_scan(points, order, radius: float) -> np.ndarray:
    """Sequential scan: a ball is packed iff no packed ball lies within 2 * radius."""
    points = as_points(points)
    n, d = points.shape
    packed = np.zeros(n, dtype=bool)
    if n == 0:
        return packed
    reach = 2.0 * radius
    reach2 = reach * reach
    cells = np.floor(points / reach).astype(np.int64)
    offsets = list(product((-1, 0, 1), repeat=d))
    grid: dict[tuple, list[int]] = {}
    for i in order:
        i = int(i)
        c = cells[i]
        p = points[i]
        blocked = False
        for off in offsets:
            for j in grid.get(tuple(int(a + b) for a, b in zip(c, off)), ()):
                q = points[j]
                if sum((p[t] - q[t]) ** 2 for t in range(d)) <= reach2:
                    blocked = True
                    break
            if blocked:
                break
        if not blocked:
            packed[i] = True
            grid.setdefault(tuple(int(a) for a in c), []).append(i)
    return packed


def rsa_pack(marked: MarkedPointSet, n: int | None = None, radius: float | None = None) -> RsaResult:
    """Pack the balls of ``marked`` in arrival order.

    Radii are ``(n omega_d)^(-1/d)`` unless ``radius`` is given.
    """
    if marked.arrival is None:
        raise ValueError("on-line packing needs arrival marks")
    pts = as_points(marked.points)
    if radius is None:
        if n is None:
            n = len(pts)
        radius = rsa_radius(n, pts.shape[1] if len(pts) else 1)
    order = arrival_order(pts, np.asarray(marked.arrival))
    packed = rsa_scan(pts, order, radius)
    return RsaResult(packed, int(packed.sum()), order)


@dataclass
class RsaRow:
    n: int
    mean: float
    stderr: float
    replicates: int


def rsa_fraction_experiment(density: Density, n_grid, replicates: int, seed: int) -> list[RsaRow]:
    """Replicate means of N/n for each n, with standard errors."""
    n_grid = [int(v) for v in n_grid]
    if n_grid != sorted(n_grid):
        raise ValueError("n_grid must be ascending")
    if replicates < 2:
        raise ValueError("need at least 2 replicates")
    rows = []
    for n in n_grid:
        fr = np.empty(replicates)
        for r in range(replicates):
            pts = sample_binomial(density, n, derive_seed(seed, f"rsa/{n}", r))
            marked = attach_marks(pts, "arrival", derive_seed(seed, f"rsa-marks/{n}", r))
            fr[r] = rsa_pack(marked, n).N / n
        rows.append(RsaRow(n, float(fr.mean()), float(fr.std(ddof=1) / math.sqrt(replicates)),
                           replicates))
    return rows


def write_rsa_table(path, rows: list[RsaRow]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "mean", "stderr", "replicates"])
        for row in rows:
            w.writerow([row.n, repr(row.mean), repr(row.stderr), row.replicates])


def packed_xi(d: int) -> Xi:
    """Packing indicator for balls of unit volume (the rescaled picture)."""
    radius = unit_ball_volume(d) ** (-1.0 / d)

    def values(cfg):
        return rsa_pack(cfg, radius=radius).packed.astype(float)

    def local(cfg, i):
        res = rsa_pack(cfg, radius=radius)
        near = np.linalg.norm(cfg.points - cfg.points[i], axis=1) <= 2 * radius
        sig = frozenset(tuple(cfg.points[j]) for j in np.flatnonzero(near & res.packed))
        return float(res.packed[i]), sig
    return Xi("rsa_packed", values, local, homogeneity=None, marks=MarkSpec(arrival=True),
              params={"d": d})
