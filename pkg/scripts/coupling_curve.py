"""Exact-match probability of the binomial/Cox coupling in B(0;K), E|H_n cap B(0;K)| = 5."""
import argparse
import math

from geomlaw.limits import coupling_curve
from geomlaw.point_process import UniformBox
from geomlaw.spatial import Window

p = argparse.ArgumentParser()
p.add_argument("--n", type=int, nargs="+", default=[100, 1000, 10000, 100000])
p.add_argument("--replicates", type=int, default=1000)
p.add_argument("--K", type=float, default=math.sqrt(5 / math.pi))
p.add_argument("--seed", type=int, default=6)
p.add_argument("--threads", type=int, default=0)
args = p.parse_args()

for row in coupling_curve(UniformBox(Window.unit_box(2)), args.K, args.n, args.replicates,
                          args.seed, args.threads):
    print(f"n={row.n:7d}  p={row.p:.4f} +- {row.stderr:.4f}")
