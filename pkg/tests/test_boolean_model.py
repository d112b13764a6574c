import math

import numpy as np
import pytest

from geomlaw import boolean_model as bm
from geomlaw.point_process import RadiusDist, attach_marks
from oracles import bfs_components, lens_area, mis_size_exhaustive, raster_euler


def scene(centers, radii, bound=None):
    radii = np.asarray(radii, float)
    return bm.BooleanScene(np.asarray(centers, float), radii,
                           float(radii.max()) if bound is None else bound)


def random_scene(seed, n=200, side=10.0, rmax=0.5):
    r = np.random.default_rng(seed)
    return scene(r.random((n, 2)) * side, r.uniform(0.05, rmax, n), rmax)


def pairwise_edges(s):
    n = s.n
    return {(i, j) for i in range(n) for j in range(i + 1, n)
            if math.dist(s.centers[i], s.centers[j]) <= s.radii[i] + s.radii[j]}


def test_build_scene_scales_radii():
    pts = np.random.default_rng(0).random((10, 2))
    marked = attach_marks(pts, "radius", 1, RadiusDist("constant", (2.0,)))
    s = bm.build_scene(marked, 100)
    assert np.allclose(s.radii, 0.2) and s.bound == pytest.approx(0.2)


def test_trivial_clumps():
    assert bm.clump_counts(scene([[0, 0]], [1])) == (1, {1: 1})
    assert bm.clump_counts(scene([[0, 0], [3, 0]], [1, 1]))[0] == 2
    assert bm.clump_counts(scene([[0, 0], [1.5, 0], [3, 0]], [1, 1, 1])) == (1, {3: 1})
    # tangency counts as overlap
    assert bm.clump_counts(scene([[0, 0], [2, 0]], [1, 1]))[0] == 1


@pytest.mark.parametrize("seed", range(4))
def test_intersection_graph_and_clumps_match_oracles(seed):
    s = random_scene(seed)
    assert s.intersection_graph.edge_set() == pairwise_edges(s)
    count, _ = bfs_components(s.n, sorted(pairwise_edges(s)))
    u, uk = bm.clump_counts(s)
    assert u == count and sum(uk.values()) == u
    assert sum(k * v for k, v in uk.items()) == s.n


def test_volume_closed_forms():
    assert bm.volume(scene([[0, 0]], [0.7])).value == pytest.approx(math.pi * 0.49, rel=1e-12)
    assert bm.volume(scene([[0, 0], [5, 0]], [1, 1])).value == pytest.approx(2 * math.pi)
    two = scene([[0, 0], [1, 0]], [1, 1])
    exact = bm.volume(two).value
    assert exact == pytest.approx(2 * math.pi - lens_area(1, 1, 1), rel=1e-12)
    mc = bm.volume(two, "montecarlo", 10**6, seed=3)
    assert abs(mc.value - exact) <= 3 * mc.stderr
    with pytest.raises(ValueError):
        bm.volume(two, "montecarlo", 0)


def test_volume_nested_and_identical_disks():
    assert bm.volume(scene([[0, 0], [0.1, 0]], [1, 0.3])).value == pytest.approx(math.pi)
    assert bm.volume(scene([[0, 0], [0, 0]], [1, 1])).value == pytest.approx(math.pi)


@pytest.mark.parametrize("seed", range(3))
def test_volume_random_clumps_against_monte_carlo(seed):
    s = random_scene(seed, n=60, side=4.0)
    mc = bm.volume(s, "montecarlo", 2 * 10**6, seed=seed)
    assert abs(bm.volume(s).value - mc.value) <= 4 * mc.stderr
    total = np.sum(math.pi * s.radii**2)
    assert bm.volume(s).value <= total
    disjoint = scene([[0, 0], [3, 0], [6, 0]], [1, 1, 1])
    assert bm.volume(disjoint).value == pytest.approx(3 * math.pi)


def test_euler_small_cases():
    assert bm.euler_curvature_2d(scene([[0, 0]], [1])) == (1, 2 * math.pi)
    assert bm.euler_curvature_2d(scene([[0, 0], [1, 0]], [1, 1]))[0] == 1
    tri = np.array([[0, 0], [1, 0], [0.5, math.sqrt(3) / 2]])
    s = scene(tri, [0.55] * 3)
    assert bm.euler_curvature_2d(s)[0] == 0
    assert raster_euler(s.centers, s.radii, 0.002) == 0
    assert bm.euler_curvature_2d(scene(tri, [0.6] * 3))[0] == 1
    ring = np.column_stack([np.cos(np.arange(8) * math.pi / 4), np.sin(np.arange(8) * math.pi / 4)])
    assert bm.euler_curvature_2d(scene(3 * ring, [1.2] * 8))[0] == 0
    assert bm.euler_curvature_2d(scene([[0, 0], [3, 0], [6, 0]], [1, 1, 1]))[0] == 3


def test_supercritical_clump_rejected():
    pts = np.random.default_rng(0).random((25, 2)) * 0.01
    with pytest.raises(bm.SupercriticalClump, match="supercritical clump"):
        bm.euler_curvature_2d(scene(pts, [1.0] * 25))


def test_packing_small_cases():
    assert bm.offline_packing(scene([[0, 0], [1, 0]], [1, 1])).M == 1
    res = bm.offline_packing(scene([[0, 0], [1.5, 0], [3, 0]], [1, 1, 1]))
    assert res.M == 2 and res.selected.tolist() == [True, False, True] and res.exact


@pytest.mark.parametrize("seed", range(4))
def test_packing_matches_exhaustive_mis(seed):
    s = random_scene(seed, n=200, side=9.0)
    res = bm.offline_packing(s)
    edges = pairwise_edges(s)
    assert not any(res.selected[i] and res.selected[j] for i, j in edges)
    u, _ = bm.clump_counts(s)
    assert u <= res.M <= s.n
    for c in s.clumps:
        if len(c) > 15:
            continue
        local = {int(v): k for k, v in enumerate(c)}
        sub = [(local[i], local[j]) for i, j in edges if i in local and j in local]
        assert res.selected[c].sum() == mis_size_exhaustive(len(c), sub)


def test_packing_translation_invariant():
    s = random_scene(5, n=150, side=8.0)
    moved = scene(s.centers + [123.25, -7.5], s.radii, s.bound)
    assert np.array_equal(bm.offline_packing(s).selected, bm.offline_packing(moved).selected)


def test_scene_csv(tmp_path):
    s = scene([[0, 0], [1, 0], [5, 5]], [1, 1, 1])
    sel = bm.offline_packing(s).selected
    s.to_csv(tmp_path / "scene.csv", sel)
    rows = [r.split(",") for r in (tmp_path / "scene.csv").read_text().splitlines()]
    assert len(rows) == 3 and all(len(r) == 5 for r in rows)
    assert [r[3] for r in rows] == ["0", "0", "1"]
