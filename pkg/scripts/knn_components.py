"""1-NN component count: finite-n n^-1 K versus the Poisson-at-origin E[1/sigma]."""
import argparse

import numpy as np

from geomlaw.functionals import component_count, component_xi
from geomlaw.graphs import knn_graph
from geomlaw.limits import StabilizationProbe, estimate_E_xi_infinity, finite_replicates
from geomlaw.point_process import PiecewiseGrid, UniformBox
from geomlaw.spatial import Window

p = argparse.ArgumentParser()
p.add_argument("--n", type=int, default=10000)
p.add_argument("--replicates", type=int, default=50)
p.add_argument("--poisson", type=int, default=4000)
p.add_argument("--seed", type=int, default=4)
p.add_argument("--threads", type=int, default=0)
args = p.parse_args()


def stat(points, n, seed):
    return component_count(knn_graph(points, 1)) / n


est = estimate_E_xi_infinity(component_xi("knn", 1), 1.0, StabilizationProbe(), args.poisson,
                             args.seed, threads=args.threads)
print(f"Poisson E[1/sigma] = {est.mean:.4f} +- {est.stderr:.4f} "
      f"(unstabilized {est.unstabilized_fraction:.3f})")
for name, dens in (("uniform", UniformBox(Window.unit_box(2))),
                   ("step", PiecewiseGrid.from_masses(Window.unit_box(2), [[0.8], [0.2]]))):
    v = finite_replicates(dens, stat, args.n, args.replicates, args.seed, args.threads)
    print(f"{name:8s} n^-1 K = {v.mean():.4f} +- {v.std(ddof=1) / np.sqrt(len(v)):.4f}")
