"""On-line packing fraction n^-1 N on [0,1] for growing n (1D jamming limit 0.4714...)."""
import argparse

from geomlaw.packing_online import rsa_fraction_experiment, write_rsa_table
from geomlaw.point_process import UniformBox
from geomlaw.spatial import Window

p = argparse.ArgumentParser()
p.add_argument("--n", type=int, nargs="+", default=[1000, 10000, 100000])
p.add_argument("--replicates", type=int, default=20)
p.add_argument("--seed", type=int, default=11)
p.add_argument("--out", default="rsa_line.csv")
args = p.parse_args()

rows = rsa_fraction_experiment(UniformBox(Window.unit_box(1)), args.n, args.replicates, args.seed)
write_rsa_table(args.out, rows)
for r in rows:
    print(f"n={r.n:7d}  n^-1 N = {r.mean:.5f} +- {r.stderr:.5f}")
