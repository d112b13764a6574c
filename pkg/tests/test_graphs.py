import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial import ConvexHull, cKDTree

from geomlaw.graphs import (DegenerateConfiguration, PatternSpec, build_graph, delaunay,
                            delaunay_voronoi_2d, gabriel, incident_edges, knn_graph, mst,
                            rng_graph, sig, triangulate)
from geomlaw.spatial import Window
from oracles import (empty_circumcircle, gabriel_edges, kruskal_complete, knn_edges,
                     rng_edges, sig_edges)

SQUARE = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], float)


def test_mst_line_and_square():
    g = mst([[0, 0], [1, 0], [3, 0]])
    assert g.edge_set() == {(0, 1), (1, 2)}
    assert g.lengths.sum() == 3
    sq = mst(SQUARE)
    assert sq.n_edges == 3 and sq.lengths.sum() == 3


@pytest.mark.parametrize("seed", range(5))
def test_mst_matches_kruskal_oracle(seed):
    pts = np.random.default_rng(seed).random((200, 2))
    assert mst(pts).edge_set() == kruskal_complete(pts)


def test_mst_large_2d_and_3d_paths():
    r = np.random.default_rng(7)
    pts = r.random((600, 2))
    assert mst(pts).edge_set() == kruskal_complete(pts)
    p3 = r.random((450, 3))
    assert mst(p3).edge_set() == kruskal_complete(p3)


def test_mst_structure_and_degree_bound():
    r = np.random.default_rng(3)
    pts = r.random((300, 2))
    g = mst(pts)
    assert g.n_edges == 299
    assert g.degrees().max() <= 6
    total = g.lengths.sum()
    # random spanning trees: attach each vertex to a random earlier one
    for _ in range(100):
        perm = r.permutation(300)
        parent = [perm[r.integers(0, k)] for k in range(1, 300)]
        length = sum(math.dist(pts[perm[k]], pts[p]) for k, p in zip(range(1, 300), parent))
        assert total <= length


def test_knn_small_cases_and_errors():
    assert knn_graph([[0, 0], [1, 1]], 1).n_edges == 1
    pts = np.random.default_rng(0).random((50, 2))
    assert knn_graph(pts, 3, directed=True).n_edges == 150
    with pytest.raises(ValueError):
        knn_graph(pts[:3], 3)


@pytest.mark.parametrize("directed", [False, True])
def test_knn_matches_scan(directed):
    pts = np.random.default_rng(1).random((500, 2))
    assert knn_graph(pts, 3, directed).edge_set() == knn_edges(pts, 3, directed)


def test_sig_small_cases():
    assert sig([[0, 0], [5, 1]]).n_edges == 1
    assert sig([[0.0], [1.0], [3.0]]).edge_set() == {(0, 1), (1, 2), (0, 2)}


def test_sig_matches_oracle():
    pts = np.random.default_rng(2).random((500, 2))
    assert sig(pts).edge_set() == sig_edges(pts)


def test_gabriel_rng_square_under_open_rule():
    # corners on the boundary of a diagonal's diameter ball do not block it
    assert gabriel(SQUARE).edge_set() == {(0, 1), (1, 2), (2, 3), (0, 3), (0, 2), (1, 3)}
    assert rng_graph(SQUARE).edge_set() == {(0, 1), (1, 2), (2, 3), (0, 3)}
    assert gabriel([[0, 0], [1, 0]]).n_edges == 1
    assert rng_graph([[0, 0], [1, 0]]).n_edges == 1


def test_proximity_graphs_match_oracles_and_chain():
    r = np.random.default_rng(4)
    for _ in range(3):
        pts = r.random((120, 2))
        m, rn, gb, dl = (mst(pts).edge_set(), rng_graph(pts).edge_set(),
                         gabriel(pts).edge_set(), delaunay(pts).edge_set())
        assert gb == gabriel_edges(pts)
        assert rn == rng_edges(pts)
        assert m <= rn <= gb <= dl


def test_delaunay_empty_circumcircle_and_hull_cover():
    pts = np.random.default_rng(5).random((300, 2))
    tri = triangulate(pts)
    assert empty_circumcircle(pts, tri.simplices)
    a, b, c = (pts[tri.simplices[:, i]] for i in range(3))
    areas = 0.5 * ((b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0]))
    assert np.all(areas > 0)
    assert areas.sum() == pytest.approx(ConvexHull(pts).volume, rel=1e-12)


def test_delaunay_degenerate_inputs():
    with pytest.raises(DegenerateConfiguration, match="degenerate configuration"):
        triangulate([[0, 0], [1, 1], [2, 2], [3, 3]])
    with pytest.raises(ValueError, match="duplicate"):
        delaunay_voronoi_2d([[0, 0], [1, 0], [0, 1], [0, 0]])


def test_voronoi_one_and_two_sites():
    one = delaunay_voronoi_2d([[0.3, 0.3]])
    assert one.n_edges == 0 and one.cell_areas[0] == math.inf
    two = delaunay_voronoi_2d([[0, 0], [1, 0]])
    assert two.n_edges == 1 and two.lengths[0] == math.inf


def test_voronoi_clipped_partition():
    pts = np.random.default_rng(6).random((300, 2))
    v = delaunay_voronoi_2d(pts, clip=Window.unit_box(2))
    assert v.cell_areas.sum() == pytest.approx(1.0, rel=1e-9)
    assert np.all(v.cell_areas > 0)


def test_voronoi_cell_areas_match_nearest_site_raster():
    r = np.random.default_rng(8)
    pts = r.random((40, 2))
    v = delaunay_voronoi_2d(pts, clip=Window.unit_box(2))
    h = 1 / 1000
    g = (np.arange(1000) + 0.5) * h
    X, Y = np.meshgrid(g, g)
    _, owner = cKDTree(pts).query(np.column_stack([X.ravel(), Y.ravel()]))
    raster = np.bincount(owner, minlength=40) * h * h
    assert np.allclose(v.cell_areas, raster, atol=5e-3)


def test_voronoi_unbounded_flags_and_interior_cells():
    r = np.random.default_rng(9)
    pts = r.random((500, 2))
    v = delaunay_voronoi_2d(pts)
    hull = set(ConvexHull(pts).vertices.tolist())
    assert set(np.flatnonzero(~v.bounded).tolist()) == hull
    areas = v.cell_areas
    assert np.all(np.isinf(areas[~v.bounded]))
    assert np.all((areas[v.bounded] > 0) & np.isfinite(areas[v.bounded]))
    interior = int(np.argmin(np.linalg.norm(pts - 0.5, axis=1)))
    pairs, lengths = incident_edges(v, interior)
    assert len(pairs) >= 3 and np.all(np.isfinite(lengths))
    # bounded Voronoi edge lengths: each is the distance between dual circumcentres
    fin = ~v.infinite
    assert np.all(v.lengths[fin] >= 0)


def test_incident_edges_modes():
    g = mst([[0, 0], [1, 0], [3, 0]])
    assert len(incident_edges(g, 0)[0]) == 1
    d = knn_graph([[0, 0], [1, 0], [3, 0]], 1, directed=True)
    ins, _ = incident_edges(d, 1, "in")
    assert {tuple(e) for e in ins} == {(0, 1), (2, 1)}
    with pytest.raises(IndexError):
        incident_edges(g, 5)


def test_pattern_spec_validation():
    with pytest.raises(ValueError, match="connected"):
        PatternSpec.explicit(4, [(0, 1), (2, 3)])
    with pytest.raises(ValueError):
        PatternSpec.explicit(7, [(i, i + 1) for i in range(6)])
    assert PatternSpec.from_dict(PatternSpec.triangle().to_dict()) == PatternSpec.triangle()


KINDS = ["mst", "knn", "delaunay", "sig", "gabriel", "rng"]


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(KINDS),
       st.floats(-50, 50), st.floats(-50, 50), st.floats(0.05, 20))
def test_translation_and_scale_invariance(seed, kind, tx, ty, a):
    pts = np.random.default_rng(seed).random((80, 2))
    g = build_graph(kind, pts, k=2)
    moved = build_graph(kind, pts + [tx, ty], k=2)
    scaled = build_graph(kind, a * pts, k=2)
    assert moved.edge_set() == g.edge_set()
    assert scaled.edge_set() == g.edge_set()
    assert np.allclose(moved.lengths, g.lengths, rtol=1e-9, atol=1e-9 * 50)
    assert np.allclose(scaled.lengths, a * g.lengths, rtol=1e-9)


def test_graph_exports(tmp_path):
    g = knn_graph(np.random.default_rng(1).random((10, 2)), 2, directed=True)
    g.to_csv(tmp_path / "e.csv")
    rows = (tmp_path / "e.csv").read_text().splitlines()
    assert len(rows) == 20 and len(rows[0].split(",")) == 3
    doc = json.loads(g.to_json())
    assert doc["directed"] is True and doc["kind"] == "knn" and doc["params"]["k"] == 2
