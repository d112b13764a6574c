"""MST length n^-1 L on [0,1]^2 and [0,2]^2; the ratio of the limits should be 2."""
import argparse
import math

import numpy as np

from geomlaw.functionals import WeightFn, weighted_length
from geomlaw.graphs import mst
from geomlaw.limits import finite_replicates
from geomlaw.point_process import UniformBox
from geomlaw.spatial import Window

p = argparse.ArgumentParser()
p.add_argument("--n", type=int, default=10000)
p.add_argument("--replicates", type=int, default=50)
p.add_argument("--seed", type=int, default=2)
p.add_argument("--threads", type=int, default=0)
args = p.parse_args()

phi = WeightFn.power(1)


def stat(points, n, seed):
    return weighted_length(mst(points), phi, math.sqrt(n)) / n


means = []
for side in (1, 2):
    dens = UniformBox(Window.box([0, 0], [side, side]))
    v = finite_replicates(dens, stat, args.n, args.replicates, args.seed + side, args.threads)
    means.append(v.mean())
    print(f"[0,{side}]^2: {v.mean():.4f} +- {v.std(ddof=1) / np.sqrt(len(v)):.4f}")
print(f"ratio {means[1] / means[0]:.4f}")
