import math

import numpy as np
import pytest

from geomlaw.packing_online import (arrival_order, rsa_fraction_experiment, rsa_pack, rsa_radius,
                                    write_rsa_table)
from geomlaw.point_process import MarkedPointSet, UniformBox
from geomlaw.spatial import Window
from oracles import rsa_line_fraction


def marked(points, arrival=None, seed=0):
    points = np.asarray(points, float)
    if arrival is None:
        arrival = np.random.default_rng(seed).random(len(points))
    return MarkedPointSet(points, np.asarray(arrival, float))


def brute_scan(points, order, r):
    packed = []
    for i in order:
        if all(math.dist(points[i], points[j]) > 2 * r for j in packed):
            packed.append(i)
    return set(packed)


def test_trivial_cases():
    assert rsa_pack(marked([[0.5, 0.5]]), 1).N == 1
    assert rsa_pack(marked(np.zeros((20, 2))), 20).N == 1
    far = np.arange(10)[:, None] * np.array([[1.0, 0.0]])
    assert rsa_pack(marked(far), 10, radius=0.49).N == 10


def test_first_arrival_always_packed():
    res = rsa_pack(marked(np.zeros((5, 2)), [0.9, 0.1, 0.5, 0.3, 0.7]), 5)
    assert res.packed.tolist() == [False, True, False, False, False]


def test_tied_arrivals_fall_back_to_coordinates():
    pts = np.array([[0.2, 0.0], [0.1, 0.0]])
    assert arrival_order(pts, np.array([0.5, 0.5])).tolist() == [1, 0]


def test_closed_blocking_at_contact():
    assert rsa_pack(marked([[0.0], [1.0]], [0.1, 0.2]), 2, radius=0.5).N == 1


@pytest.mark.parametrize("d", [1, 2, 3])
def test_matches_brute_scan(d):
    r = np.random.default_rng(d)
    pts = r.random((300, d))
    m = marked(pts, seed=d)
    res = rsa_pack(m, 300)
    rad = rsa_radius(300, d)
    assert set(np.flatnonzero(res.packed).tolist()) == brute_scan(pts, res.order, rad)


def test_line_matches_sorted_list_oracle():
    r = np.random.default_rng(11)
    n = 5000
    xs = r.random(n)
    m = marked(xs[:, None], seed=12)
    res = rsa_pack(m, n)
    assert res.N == rsa_line_fraction(xs.tolist(), res.order.tolist(), 1.0 / n)


def test_maximality_relabel_and_deletion():
    r = np.random.default_rng(5)
    pts = r.random((200, 2))
    arr = r.random(200)
    res = rsa_pack(marked(pts, arr), 200)
    rad = rsa_radius(200, 2)
    pos = np.empty(200, int)
    pos[res.order] = np.arange(200)
    for i in np.flatnonzero(~res.packed):
        earlier = [j for j in np.flatnonzero(res.packed) if pos[j] < pos[i]]
        assert any(math.dist(pts[i], pts[j]) <= 2 * rad for j in earlier)
    perm = r.permutation(200)
    assert rsa_pack(marked(pts[perm], arr[perm]), 200, radius=rad).N == res.N
    for i in np.flatnonzero(~res.packed)[:10]:
        keep = np.arange(200) != i
        sub = rsa_pack(marked(pts[keep], arr[keep]), radius=rad)
        assert np.array_equal(sub.packed, res.packed[keep])


def test_experiment_reproducible(tmp_path):
    dens = UniformBox(Window.unit_box(1))
    a = rsa_fraction_experiment(dens, [100, 1000], 5, 9)
    b = rsa_fraction_experiment(dens, [100, 1000], 5, 9)
    write_rsa_table(tmp_path / "a.csv", a)
    write_rsa_table(tmp_path / "b.csv", b)
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert (tmp_path / "a.csv").read_text().splitlines()[0] == "n,mean,stderr,replicates"
    with pytest.raises(ValueError):
        rsa_fraction_experiment(dens, [1000, 100], 5, 9)
