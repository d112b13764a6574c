"""Boolean model clump statistics: n^-1 U, U_k, V, chi and M against the Poisson estimate."""
import argparse
from collections import Counter

import numpy as np

from geomlaw import boolean_model as bm
from geomlaw.limits import StabilizationProbe, estimate_E_xi_infinity
from geomlaw.point_process import RadiusDist, UniformBox, attach_marks, derive_seed, sample_binomial
from geomlaw.spatial import Window

p = argparse.ArgumentParser()
p.add_argument("--n", type=int, default=10000)
p.add_argument("--replicates", type=int, default=20)
p.add_argument("--poisson", type=int, default=1500)
p.add_argument("--radius", type=float, nargs=2, default=[0.1, 0.4])
p.add_argument("--seed", type=int, default=8)
p.add_argument("--threads", type=int, default=0)
args = p.parse_args()

radius = RadiusDist("uniform", tuple(args.radius))
dens = UniformBox(Window.unit_box(2))
u, vol, chi, pack, orders = [], [], [], [], Counter()
for r in range(args.replicates):
    s = derive_seed(args.seed, "boolean", r)
    scene = bm.build_scene(attach_marks(sample_binomial(dens, args.n, s), "radius", s, radius),
                           args.n)
    U, Uk = bm.clump_counts(scene)
    orders.update(Uk)
    u.append(U / args.n)
    vol.append(bm.volume(scene).value)
    chi.append(bm.euler_curvature_2d(scene)[1] / args.n)
    pack.append(bm.offline_packing(scene).M / args.n)
for name, v in (("n^-1 U", u), ("V", vol), ("n^-1 W", chi), ("n^-1 M", pack)):
    print(f"{name:7s} {np.mean(v):.4f} +- {np.std(v, ddof=1) / np.sqrt(len(v)):.4f}")
print("mean U_k:", {k: round(orders[k] / args.replicates, 1) for k in sorted(orders)})
est = estimate_E_xi_infinity(bm.clump_xi(radius), 1.0, StabilizationProbe(), args.poisson,
                             derive_seed(args.seed, "poisson"), threads=args.threads)
print(f"Poisson E[1/sigma] = {est.mean:.4f} +- {est.stderr:.4f}")
