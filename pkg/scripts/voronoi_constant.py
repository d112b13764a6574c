"""Voronoi total edge length n^-1 L(VOR(X_n)) on the unit square along an n grid (limit 2)."""
import argparse
import csv
import math

from geomlaw.functionals import WeightFn, weighted_length
from geomlaw.graphs import delaunay_voronoi_2d
from geomlaw.limits import convergence_experiment
from geomlaw.point_process import UniformBox
from geomlaw.spatial import Window

p = argparse.ArgumentParser()
p.add_argument("--n", type=int, nargs="+", default=[100, 1000, 10000])
p.add_argument("--replicates", type=int, default=50)
p.add_argument("--seed", type=int, default=1)
p.add_argument("--threads", type=int, default=0)
p.add_argument("--out", default="voronoi_constant.csv")
args = p.parse_args()

dens = UniformBox(Window.unit_box(2))
phi = WeightFn.power(1, at_infinity=0)


def stat(points, n, seed):
    return weighted_length(delaunay_voronoi_2d(points, dens.box), phi, math.sqrt(n)) / n


rows = convergence_experiment(dens, stat, args.n, args.replicates, args.seed, limit=2.0,
                              threads=args.threads)
with open(args.out, "w", newline="") as fh:
    w = csv.writer(fh)
    w.writerow(["n", "mean", "stderr", "abs_error", "l2_error", "replicates"])
    for r in rows:
        w.writerow([r.n, r.mean, r.stderr, r.abs_error, r.l2_error, r.replicates])
        print(f"n={r.n:6d}  mean={r.mean:.4f} +- {r.stderr:.4f}  |err|={r.abs_error:.4f}")
