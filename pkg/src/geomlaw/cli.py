"""``geomlaw`` command line.

Exit codes: 0 success, 2 configuration or usage error, 3 runtime failure
(for example an estimate with no stabilized replicate).
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import boolean_model as bm
from .config import (ConfigError, ExperimentConfig, limit_value, load_config, make_statistic,
                     make_xi, validate_config)
from .functionals import (component_count, edge_length_ecdf, h_xi, sample_variance_xi)
from .graphs import GRAPH_KINDS, build_graph
from .limits import (Unstabilized, coupling_curve, convergence_experiment,
                     estimate_E_xi_infinity, rhs_integral)
from .packing_online import rsa_fraction_experiment, write_rsa_table
from .point_process import (attach_marks, derive_seed, sample_binomial, sample_poisson)
from .spatial import Window, read_points_csv, write_points_csv

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser, config_required: bool = True) -> None:
    p.add_argument("--config", required=config_required, help="experiment JSON")
    p.add_argument("--seed", type=int, help="master seed (overrides config and GEOMLAW_SEED)")
    p.add_argument("--threads", type=int, default=None, help="worker threads, 0 = auto")
    p.add_argument("--out", default=None, help="output directory (or file for graph)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--header", action="store_true", help="write CSV header rows")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="geomlaw", description="Stabilizing functionals on random point sets.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sample", help="draw a binomial or Poisson point set")
    _common(p, config_required=False)
    p.add_argument("--n", type=int, help="binomial sample size (default: last n_grid entry)")
    p.add_argument("--tau", type=float, help="Poisson intensity on a box window instead")
    p.add_argument("--side", type=float, default=1.0, help="Poisson box side length")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--origin", action="store_true", help="append the origin (Poisson)")

    p = sub.add_parser("graph", help="build a graph on a point CSV")
    _common(p, config_required=False)
    p.add_argument("--kind", required=True, choices=GRAPH_KINDS)
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--directed", action="store_true")

    p = sub.add_parser("functional", help="evaluate n^-1 H on one sample or a point CSV")
    _common(p)
    p.add_argument("--in", dest="inp")
    p.add_argument("--n", type=int)

    for name, text in (("limit", "estimate E[xi_inf(P_1)] and the density integral"),
                       ("converge", "finite-n convergence table"),
                       ("couple", "binomial/Cox coupling match probabilities"),
                       ("boolean", "Boolean model statistics for one scene"),
                       ("pack", "on-line packing fractions")):
        p = sub.add_parser(name, help=text)
        _common(p)
        if name == "boolean":
            p.add_argument("--n", type=int)

    p = sub.add_parser("validate", help="check a config file")
    p.add_argument("path", nargs="?")
    p.add_argument("--config")
    return ap


# ---------------------------------------------------------------- helpers

def _seed(args, cfg: ExperimentConfig | None) -> int:
    if args.seed is not None:
        return int(args.seed)
    env = os.environ.get("GEOMLAW_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"GEOMLAW_SEED must be an integer, got {env!r}")
    return int(cfg.seed) if cfg is not None else 0


def _threads(args, cfg: ExperimentConfig | None) -> int:
    if args.threads is not None:
        return args.threads
    return cfg.threads if cfg is not None else 1


def _outdir(args, cfg: ExperimentConfig | None) -> Path:
    out = Path(args.out or (cfg.output.get("dir") if cfg else None) or "out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _stem(cfg: ExperimentConfig, command: str) -> str:
    return f"{cfg.output.get('prefix', cfg.name)}_{command}"


def _write_table(path: Path, header: list, rows: list, fmt: str) -> Path:
    if fmt == "json":
        path = path.with_suffix(".json")
        path.write_text(json.dumps([dict(zip(header, r)) for r in rows], indent=2) + "\n",
                        encoding="utf-8")
        return path
    path = path.with_suffix(".csv")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow(["" if v is None else repr(v) if isinstance(v, float) else v for v in r])
    return path


def _summary(path: Path, cfg: ExperimentConfig, seed: int, started: float, **payload) -> None:
    echo = cfg.to_dict()
    echo["seed"] = seed
    doc = {"config": echo, **payload, "wall_time_s": round(time.perf_counter() - started, 3)}
    path.with_suffix(".summary.json").write_text(json.dumps(doc, indent=2) + "\n",
                                                 encoding="utf-8")


# --------------------------------------------------------------- commands

def cmd_sample(args) -> int:
    cfg = load_config(args.config) if args.config else None
    seed = _seed(args, cfg)
    out = _outdir(args, cfg)
    if args.tau is not None:
        win = Window.box(np.zeros(args.dim) - args.side / 2, np.zeros(args.dim) + args.side / 2)
        pts = sample_poisson(args.tau, win, seed, with_origin=args.origin)
        path = out / "poisson.csv"
    else:
        if cfg is None:
            raise ConfigError("sample needs --config for a binomial sample (or --tau)")
        n = args.n or cfg.n_grid[-1]
        pts = sample_binomial(cfg.dens, n, seed)
        path = out / f"{_stem(cfg, 'sample')}.csv"
    write_points_csv(path, pts, header=args.header)
    print(path)
    return EXIT_OK


def cmd_graph(args) -> int:
    pts = read_points_csv(args.inp)
    g = build_graph(args.kind, pts, k=args.k, directed=args.directed)
    target = Path(args.out) if args.out else Path(f"{args.kind}_edges.{args.format}")
    if target.suffix not in (".csv", ".json"):
        target.mkdir(parents=True, exist_ok=True)
        target = target / f"{args.kind}_edges.{args.format}"
    if target.suffix == ".json":
        target.write_text(g.to_json() + "\n", encoding="utf-8")
    elif args.kind == "voronoi":
        with open(target, "w", encoding="utf-8", newline="") as fh:
            for (i, j), length in zip(g.edges, g.lengths):
                fh.write(f"{int(i)},{int(j)},{float(length)!r}\n")
    else:
        g.to_csv(target, header=args.header)
    print(target)
    return EXIT_OK


def cmd_functional(args) -> int:
    cfg = load_config(args.config)
    seed = _seed(args, cfg)
    if args.inp:
        pts = read_points_csv(args.inp)
        n = len(pts)
    else:
        n = args.n or cfg.n_grid[-1]
        pts = sample_binomial(cfg.dens, n, derive_seed(seed, f"converge/{n}", 0))
    stat = make_statistic(cfg)(pts, n, derive_seed(seed, f"converge/{n}", 0))
    doc = {"n": n, "normalized_H": stat}
    if cfg.model["kind"] == "points":
        xi = make_xi(cfg)
        scale = n ** (1.0 / pts.shape[1])
        doc["H"] = h_xi(pts, xi, scale)
        doc["sample_variance"] = sample_variance_xi(pts, xi, scale)
    if cfg.model["kind"] in GRAPH_KINDS and cfg.model["kind"] != "voronoi":
        g = build_graph(cfg.model["kind"], pts, k=int(cfg.model.get("k", 1)),
                        directed=bool(cfg.model.get("directed", False)))
        doc["edges"] = g.n_edges
        doc["components"] = component_count(g)
        t_grid = cfg.output.get("t_grid")
        if t_grid:
            e = edge_length_ecdf(g, n ** (1.0 / pts.shape[1]), t_grid)
            doc["edge_length_ecdf"] = [[float(t), float(v)] for t, v in zip(e.t, e.values)]
    print(json.dumps(doc, indent=2))
    return EXIT_OK


def cmd_limit(args) -> int:
    cfg = load_config(args.config)
    seed, threads = _seed(args, cfg), _threads(args, cfg)
    started = time.perf_counter()
    xi = make_xi(cfg)
    e1 = estimate_E_xi_infinity(xi, 1.0, cfg.probe_spec, cfg.probe_replicates, seed, cfg.dim,
                                threads)
    lim = cfg.limit
    rhs = rhs_integral(cfg.dens, xi, cfg.probe_spec, int(lim.get("outer_samples", 200)),
                       int(lim.get("inner_replicates", cfg.probe_replicates)),
                       derive_seed(seed, "rhs"), lim.get("shortcut"), threads)
    out = _outdir(args, cfg) / _stem(cfg, "limit")
    header = ["quantity", "mean", "stderr", "replicates", "unstabilized_fraction"]
    rows = [["E_xi_inf_P1", e1.mean, e1.stderr, e1.replicates, e1.unstabilized_fraction],
            ["rhs_integral", rhs.mean, rhs.stderr, rhs.replicates, rhs.unstabilized_fraction]]
    path = _write_table(out, header, rows, args.format)
    _summary(out, cfg, seed, started, E_xi_inf_P1=e1.to_dict(), rhs_integral=rhs.to_dict())
    print(path)
    return EXIT_OK


def cmd_converge(args) -> int:
    cfg = load_config(args.config)
    seed, threads = _seed(args, cfg), _threads(args, cfg)
    started = time.perf_counter()
    limit = limit_value(cfg)
    limit_est = None
    if cfg.limit["source"] == "rhs_integral":
        lim = cfg.limit
        limit_est = rhs_integral(cfg.dens, make_xi(cfg), cfg.probe_spec,
                                 int(lim.get("outer_samples", 200)),
                                 int(lim.get("inner_replicates", cfg.probe_replicates)),
                                 derive_seed(seed, "rhs"), lim.get("shortcut"), threads)
        limit = limit_est.mean
    rows = convergence_experiment(cfg.dens, make_statistic(cfg), cfg.n_grid, cfg.replicates,
                                  seed, limit, threads)
    out = _outdir(args, cfg) / _stem(cfg, "converge")
    header = ["n", "mean", "stderr", "abs_error", "l2_error", "replicates"]
    table = [[r.n, r.mean, r.stderr, r.abs_error, r.l2_error, r.replicates] for r in rows]
    path = _write_table(out, header, table, args.format)
    _summary(out, cfg, seed, started, limit=limit, limit_source=cfg.limit["source"],
             limit_estimate=None if limit_est is None else limit_est.to_dict(),
             table=[dict(zip(header, r)) for r in table])
    print(path)
    return EXIT_OK


def cmd_couple(args) -> int:
    cfg = load_config(args.config)
    if cfg.coupling is None:
        raise ConfigError("coupling: couple needs a coupling block with K")
    seed, threads = _seed(args, cfg), _threads(args, cfg)
    started = time.perf_counter()
    rows = coupling_curve(cfg.dens, float(cfg.coupling["K"]), cfg.n_grid, cfg.replicates, seed,
                          threads)
    out = _outdir(args, cfg) / _stem(cfg, "couple")
    header = ["n", "match_probability", "stderr", "replicates"]
    table = [[r.n, r.p, r.stderr, r.replicates] for r in rows]
    path = _write_table(out, header, table, args.format)
    _summary(out, cfg, seed, started, table=[dict(zip(header, r)) for r in table])
    print(path)
    return EXIT_OK


def cmd_boolean(args) -> int:
    cfg = load_config(args.config)
    if cfg.model["kind"] != "boolean":
        raise ConfigError("model/kind: boolean needs a boolean model config")
    seed = _seed(args, cfg)
    started = time.perf_counter()
    n = args.n or cfg.n_grid[-1]
    pts = sample_binomial(cfg.dens, n, derive_seed(seed, f"converge/{n}", 0))
    marked = attach_marks(pts, "radius", derive_seed(seed, f"converge/{n}", 0), cfg.radius)
    scene = bm.build_scene(marked, n)
    u, uk = bm.clump_counts(scene)
    pack = bm.offline_packing(scene)
    stats = {"n": n, "U": u, "U_k": {str(k): v for k, v in uk.items()}, "M": pack.M,
             "packing_exact": pack.exact, "max_clump": max(uk) if uk else 0}
    if scene.dim == 2:
        stats["V"] = bm.volume(scene).value
        try:
            chi, w = bm.euler_curvature_2d(scene)
            stats["chi"], stats["W"] = chi, w
        except bm.SupercriticalClump as exc:
            stats["chi_error"] = str(exc)
    out = _outdir(args, cfg) / _stem(cfg, "boolean")
    scene.to_csv(out.with_suffix(".scene.csv"), pack.selected)
    _summary(out, cfg, seed, started, stats=stats)
    print(json.dumps(stats, indent=2))
    return EXIT_OK


def cmd_pack(args) -> int:
    cfg = load_config(args.config)
    seed = _seed(args, cfg)
    started = time.perf_counter()
    rows = rsa_fraction_experiment(cfg.dens, cfg.n_grid, cfg.replicates, seed)
    out = _outdir(args, cfg) / _stem(cfg, "pack")
    if args.format == "csv":
        path = out.with_suffix(".csv")
        write_rsa_table(path, rows)
    else:
        path = _write_table(out, ["n", "mean", "stderr", "replicates"],
                            [[r.n, r.mean, r.stderr, r.replicates] for r in rows], "json")
    _summary(out, cfg, seed, started, table=[vars(r) for r in rows])
    print(path)
    return EXIT_OK


def cmd_validate(args) -> int:
    path = args.path or args.config
    if not path:
        raise ConfigError("validate needs a config path")
    report = validate_config(path)
    print(report.render())
    return EXIT_OK if report.ok else EXIT_CONFIG


COMMANDS = {"sample": cmd_sample, "graph": cmd_graph, "functional": cmd_functional,
            "limit": cmd_limit, "converge": cmd_converge, "couple": cmd_couple,
            "boolean": cmd_boolean, "pack": cmd_pack, "validate": cmd_validate}


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error:\n{exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (Unstabilized, bm.SupercriticalClump, ValueError, RuntimeError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def main() -> None:
    try:
        code = run()
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else EXIT_CONFIG
    sys.exit(code)


if __name__ == "__main__":
    main()
