"""Brute-force reference implementations used by the tests.

Nothing here calls into geomlaw; each oracle is the slow, obvious version.
"""
from __future__ import annotations

import bisect
import math
from collections import deque
from itertools import combinations

import numpy as np
from scipy import ndimage


def knn_scan(points, q, k, skip=None):
    rows = [(math.dist(p, q), tuple(p), i) for i, p in enumerate(points) if i != skip]
    rows.sort()
    return [r[2] for r in rows[:k]]


def range_scan(points, c, r):
    rows = sorted((math.dist(p, c), tuple(p), i) for i, p in enumerate(points)
                  if math.dist(p, c) <= r)
    return [row[2] for row in rows]


def kruskal_complete(points):
    n = len(points)
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            a = parent[a]
        return a
    pairs = sorted((math.dist(points[i], points[j]), i, j)
                   for i in range(n) for j in range(i + 1, n))
    out = set()
    for _, i, j in pairs:
        a, b = find(i), find(j)
        if a != b:
            parent[a] = b
            out.add((i, j))
    return out


def knn_edges(points, k, directed):
    out = set()
    for i, p in enumerate(points):
        for j in knn_scan(points, p, k, skip=i):
            out.add((i, j) if directed else (min(i, j), max(i, j)))
    return out


def sig_edges(points):
    n = len(points)
    r = [min(math.dist(points[i], points[j]) for j in range(n) if j != i) for i in range(n)]
    return {(i, j) for i in range(n) for j in range(i + 1, n)
            if math.dist(points[i], points[j]) <= r[i] + r[j]}


def gabriel_edges(points):
    n = len(points)
    out = set()
    for i in range(n):
        for j in range(i + 1, n):
            m = (points[i] + points[j]) / 2
            rad = math.dist(points[i], points[j]) / 2
            if not any(math.dist(points[z], m) < rad for z in range(n) if z not in (i, j)):
                out.add((i, j))
    return out


def rng_edges(points):
    n = len(points)
    out = set()
    for i in range(n):
        for j in range(i + 1, n):
            dij = math.dist(points[i], points[j])
            if not any(max(math.dist(points[i], points[z]), math.dist(points[j], points[z])) < dij
                       for z in range(n) if z not in (i, j)):
                out.add((i, j))
    return out


def bfs_components(n, edges):
    adj = [[] for _ in range(n)]
    for i, j in edges:
        adj[i].append(j)
        adj[j].append(i)
    seen = [False] * n
    count = 0
    order = [0] * n
    for s in range(n):
        if seen[s]:
            continue
        count += 1
        comp = [s]
        seen[s] = True
        dq = deque([s])
        while dq:
            v = dq.popleft()
            for w in adj[v]:
                if not seen[w]:
                    seen[w] = True
                    comp.append(w)
                    dq.append(w)
        for v in comp:
            order[v] = len(comp)
    return count, order


def empty_circumcircle(points, triangles, rel=1e-9):
    """Every triangle's circumcircle is free of other points (up to ``rel``)."""
    for t in triangles:
        a, b, c = (points[v] for v in t)
        d = 2 * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]))
        ux = ((a @ a) * (b[1] - c[1]) + (b @ b) * (c[1] - a[1]) + (c @ c) * (a[1] - b[1])) / d
        uy = ((a @ a) * (c[0] - b[0]) + (b @ b) * (a[0] - c[0]) + (c @ c) * (b[0] - a[0])) / d
        r = math.dist((ux, uy), a)
        dist = np.hypot(points[:, 0] - ux, points[:, 1] - uy)
        mask = np.ones(len(points), bool)
        mask[list(t)] = False
        if np.any(dist[mask] < r * (1 - rel)):
            return False
    return True


def mis_size_exhaustive(n, edges):
    best = 0
    adj = [0] * n
    for i, j in edges:
        adj[i] |= 1 << j
        adj[j] |= 1 << i
    for mask in range(1 << n):
        size = bin(mask).count("1")
        if size <= best:
            continue
        ok = all(not (adj[v] & mask) for v in range(n) if mask >> v & 1)
        if ok:
            best = size
    return best


def lens_area(r1, r2, d):
    if d >= r1 + r2:
        return 0.0
    if d <= abs(r1 - r2):
        return math.pi * min(r1, r2) ** 2
    # circular-segment form
    x = (d * d + r1 * r1 - r2 * r2) / (2 * d)
    seg1 = r1 * r1 * math.acos(x / r1) - x * math.sqrt(r1 * r1 - x * x)
    y = d - x
    seg2 = r2 * r2 * math.acos(y / r2) - y * math.sqrt(r2 * r2 - y * y)
    return seg1 + seg2


def raster_euler(centers, radii, pixel, min_hole=0.0):
    """Euler characteristic of a union of disks on a pixel raster.

    Foreground uses 8-connectivity, background 4-connectivity (a dual pair).
    Background pockets of area below ``min_hole`` are discarded: they are
    pixels cut off at the tip of the wedge where two circles cross.
    """
    lo = np.min(centers - radii[:, None], axis=0) - 3 * pixel
    hi = np.max(centers + radii[:, None], axis=0) + 3 * pixel
    xs = np.arange(lo[0], hi[0], pixel) + pixel / 2
    ys = np.arange(lo[1], hi[1], pixel) + pixel / 2
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    img = np.zeros(X.shape, bool)
    for (cx, cy), r in zip(centers, radii):
        img |= (X - cx) ** 2 + (Y - cy) ** 2 <= r * r
    _, fg = ndimage.label(img, structure=np.ones((3, 3)))
    lab, bg = ndimage.label(~img)
    sizes = np.bincount(lab.ravel())[1:] * pixel * pixel
    holes = int(np.sum(sizes >= min_hole)) - 1
    return fg - holes


def rsa_line_fraction(xs, order, diameter):
    """1D sequential packing with a sorted list: a rod is accepted iff its
    centre is more than ``diameter`` from every accepted centre."""
    placed = []
    for i in order:
        x = xs[i]
        pos = bisect.bisect_left(placed, x)
        if pos > 0 and x - placed[pos - 1] <= diameter:
            continue
        if pos < len(placed) and placed[pos] - x <= diameter:
            continue
        placed.insert(pos, x)
    return len(placed)


def triangle_vertices_brute(n, edges):
    adj = [set() for _ in range(n)]
    for i, j in edges:
        adj[i].add(j)
        adj[j].add(i)
    hit = set()
    for a, b, c in combinations(range(n), 3):
        if b in adj[a] and c in adj[a] and c in adj[b]:
            hit.update((a, b, c))
    return hit


def resolvable(centers, radii, delta):
    """True when every geometric feature of the disk union is at least ``delta``:
    no near tangencies and no circle crossing point within ``delta`` of a third circle."""
    m = len(radii)
    crossings = []
    for i, j in combinations(range(m), 2):
        d = math.dist(centers[i], centers[j])
        if abs(d - (radii[i] + radii[j])) < delta or abs(d - abs(radii[i] - radii[j])) < delta:
            return False
        if abs(radii[i] - radii[j]) < d < radii[i] + radii[j]:
            a = (radii[i] ** 2 - radii[j] ** 2 + d * d) / (2 * d)
            h = math.sqrt(max(radii[i] ** 2 - a * a, 0.0))
            u = (centers[j] - centers[i]) / d
            base = centers[i] + a * u
            perp = np.array([-u[1], u[0]])
            crossings += [(i, j, base + h * perp), (i, j, base - h * perp)]
    for i, j, p in crossings:
        for k in range(m):
            if k not in (i, j) and abs(math.dist(p, centers[k]) - radii[k]) < delta:
                return False
    return True


def resolved_raster_euler(centers, radii, pixel, min_hole=0.0, levels=4):
    """Raster Euler characteristic at the first pixel size where halving no longer
    changes it; None if it keeps changing."""
    prev = raster_euler(centers, radii, pixel, min_hole)
    for _ in range(levels):
        pixel /= 2
        cur = raster_euler(centers, radii, pixel, min_hole)
        if cur == prev:
            return cur
        prev = cur
    return None
