"""Experiment configuration: JSON schema, semantic checks, and the builders
that turn a config into functionals and finite-n statistics."""
from __future__ import annotations

import json
import re
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema

from . import boolean_model as bm
from .functionals import (WeightFn, Xi, ball_count_xi, component_count, component_xi, constant_xi,
                          edge_xi, h_xi, nn_distance_xi, pattern_xi, vertex_pattern_count,
                          weighted_length)
from .graphs import GRAPH_KINDS, PatternSpec, build_graph
from .limits import StabilizationProbe
from .packing_online import packed_xi, rsa_pack
from .point_process import Density, RadiusDist, attach_marks, density_from_dict

BOOLEAN_FUNCTIONALS = ("clumps", "volume", "curvature", "packing")
GRAPH_FUNCTIONALS = ("weighted_length", "components", "pattern")
POINT_FUNCTIONALS = ("constant", "nn_distance", "ball_count")


class ConfigError(ValueError):
    def __init__(self, messages):
        self.messages = list(messages) if isinstance(messages, (list, tuple)) else [messages]
        super().__init__("\n".join(self.messages))


def load_schema() -> dict:
    text = resources.files("geomlaw").joinpath("schema/experiment.schema.json").read_text()
    return json.loads(text)


@dataclass
class ExperimentConfig:
    density: dict
    model: dict
    functional: dict
    name: str = "experiment"
    seed: int = 0
    threads: int = 1
    n_grid: list = field(default_factory=lambda: [1000])
    replicates: int = 10
    probe: dict = field(default_factory=dict)
    limit: dict = field(default_factory=lambda: {"source": "none"})
    coupling: dict | None = None
    output: dict = field(default_factory=dict)
    base_dir: str | None = None

    @classmethod
    def from_dict(cls, spec: dict, base_dir=None) -> "ExperimentConfig":
        known = {k: v for k, v in spec.items() if k in cls.__dataclass_fields__}
        return cls(**known, base_dir=None if base_dir is None else str(base_dir))

    def to_dict(self) -> dict:
        out = asdict(self)
        out.pop("base_dir")
        if out["coupling"] is None:
            out.pop("coupling")
        return out

    # ------------------------------------------------------------ builders

    @property
    def dens(self) -> Density:
        return density_from_dict(self.density, None if self.base_dir is None else Path(self.base_dir))

    @property
    def dim(self) -> int:
        return self.dens.dim

    @property
    def probe_spec(self) -> StabilizationProbe:
        p = {k: v for k, v in self.probe.items() if k != "replicates"}
        if "radii" in p:
            p["radii"] = tuple(p["radii"])
        return StabilizationProbe(**p)

    @property
    def probe_replicates(self) -> int:
        return int(self.probe.get("replicates", 200))

    @property
    def phi(self) -> WeightFn:
        return WeightFn.from_dict(self.functional.get("phi", {"kind": "constant"}))

    @property
    def radius(self) -> RadiusDist:
        return RadiusDist.from_dict(self.model["radius"])


# ------------------------------------------------------------- validation

def _locate(text: str, path) -> int | None:
    """Line of the JSON member reached by ``path`` (keys followed in order)."""
    pos, line = 0, None
    for key in path:
        if isinstance(key, int):
            continue
        m = re.compile(r'"%s"\s*:' % re.escape(str(key))).search(text, pos)
        if m is None:
            break
        pos = m.end()
        line = text.count("\n", 0, m.start()) + 1
    return line


def _anchor(text: str | None, path, msg: str) -> str:
    where = "/".join(str(p) for p in path) or "<root>"
    line = _locate(text, path) if text is not None else None
    return f"line {line}: {where}: {msg}" if line else f"{where}: {msg}"


def _semantic(cfg: dict) -> list[tuple[list, str]]:
    errs = []
    model, fn = cfg["model"], cfg["functional"]
    kind, name = model["kind"], fn["name"]
    try:
        dens = density_from_dict(cfg["density"], cfg.get("_base_dir"))
        d = dens.dim
    except (ValueError, KeyError, OSError, TypeError) as exc:
        return [(["density"], f"invalid density: {exc}")]
    if kind in GRAPH_KINDS:
        if name not in GRAPH_FUNCTIONALS:
            errs.append((["functional", "name"], f"{name!r} is not a graph functional"))
        if kind in ("voronoi", "delaunay") and d != 2:
            errs.append((["model", "kind"], f"{kind} graphs require d = 2 (got d = {d})"))
    elif kind == "boolean":
        if name not in BOOLEAN_FUNCTIONALS:
            errs.append((["functional", "name"], f"{name!r} is not a Boolean model functional"))
        if "radius" not in model:
            errs.append((["model"], "boolean model needs a radius distribution"))
        if name in ("volume", "curvature") and d != 2:
            errs.append((["functional", "name"], f"{name} is implemented for d = 2 only"))
    elif kind == "rsa":
        if name != "packed":
            errs.append((["functional", "name"], "rsa model supports the 'packed' functional"))
    elif name not in POINT_FUNCTIONALS:
        errs.append((["functional", "name"], f"{name!r} needs a graph or scene model"))
    if "radius" in model:
        try:
            RadiusDist.from_dict(model["radius"])
        except (ValueError, KeyError) as exc:
            errs.append((["model", "radius"], str(exc)))
    if name == "weighted_length":
        try:
            phi = WeightFn.from_dict(fn.get("phi", {"kind": "constant"}))
            if kind == "voronoi" and phi.value_at_infinity != 0:
                errs.append((["functional", "phi"],
                             "Voronoi functionals need phi(inf) = 0 "
                             f"(this phi has phi(inf) = {phi.value_at_infinity})"))
        except (ValueError, KeyError) as exc:
            errs.append((["functional", "phi"], str(exc)))
    if name == "pattern":
        try:
            PatternSpec.from_dict(fn.get("pattern", {}))
        except (ValueError, KeyError) as exc:
            errs.append((["functional", "pattern"], f"invalid pattern: {exc}"))
    grid = cfg.get("n_grid", [])
    if grid != sorted(grid):
        errs.append((["n_grid"], "n_grid must be ascending"))
    k = model.get("k", 1)
    if kind == "knn" and grid and min(grid) <= k:
        errs.append((["n_grid"], f"knn needs n > k = {k}"))
    lim = cfg.get("limit", {"source": "none"})
    if lim["source"] == "fixed" and "value" not in lim:
        errs.append((["limit"], "fixed limit needs a value"))
    if "probe" in cfg:
        try:
            p = {k: v for k, v in cfg["probe"].items() if k != "replicates"}
            if "radii" in p:
                p["radii"] = tuple(p["radii"])
            StabilizationProbe(**p)
        except ValueError as exc:
            errs.append((["probe"], str(exc)))
    return errs


@dataclass
class ValidationReport:
    ok: bool
    messages: list
    config: ExperimentConfig | None = None

    def render(self) -> str:
        if self.ok:
            return "ok\n" + json.dumps(self.config.to_dict(), indent=2, sort_keys=True)
        return "\n".join(self.messages)


def validate_dict(spec: dict, text: str | None = None, base_dir=None) -> ValidationReport:
    validator = jsonschema.Draft202012Validator(load_schema())
    msgs = [_anchor(text, list(e.absolute_path), e.message)
            for e in sorted(validator.iter_errors(spec), key=lambda e: list(e.absolute_path))]
    if msgs:
        return ValidationReport(False, msgs)
    spec = dict(spec)
    spec["_base_dir"] = None if base_dir is None else Path(base_dir)
    msgs = [_anchor(text, p, m) for p, m in _semantic(spec)]
    spec.pop("_base_dir")
    if msgs:
        return ValidationReport(False, msgs)
    return ValidationReport(True, [], ExperimentConfig.from_dict(spec, base_dir))


def validate_config(path) -> ValidationReport:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as exc:
        return ValidationReport(False, [f"line {exc.lineno} column {exc.colno}: "
                                        f"malformed JSON: {exc.msg}"])
    if not isinstance(spec, dict):
        return ValidationReport(False, ["line 1: <root>: config must be a JSON object"])
    return validate_dict(spec, text, path.parent)


def load_config(path) -> ExperimentConfig:
    report = validate_config(path)
    if not report.ok:
        raise ConfigError(report.messages)
    return report.config


# --------------------------------------------------------------- builders

def make_xi(cfg: ExperimentConfig) -> Xi:
    """The per-point functional in the rescaled picture."""
    kind, fn = cfg.model["kind"], cfg.functional
    name = fn["name"]
    k, directed = int(cfg.model.get("k", 1)), bool(cfg.model.get("directed", False))
    if name == "weighted_length":
        return edge_xi(kind, cfg.phi, k, directed)
    if name == "components":
        return component_xi(kind, k, directed)
    if name == "pattern":
        return pattern_xi(kind, PatternSpec.from_dict(fn["pattern"]), k, directed)
    if name == "clumps":
        return bm.clump_xi(cfg.radius, fn.get("order"))
    if name == "volume":
        return bm.clump_volume_xi(cfg.radius)
    if name == "curvature":
        return bm.curvature_xi(cfg.radius)
    if name == "packing":
        return bm.packing_xi(cfg.radius)
    if name == "packed":
        return packed_xi(cfg.dim)
    if name == "constant":
        return constant_xi(float(fn.get("c", 1.0)))
    if name == "nn_distance":
        return nn_distance_xi(float(fn.get("alpha", 1.0)))
    if name == "ball_count":
        return ball_count_xi(float(fn["rho"]))
    raise ConfigError(f"functional/name: unknown functional {name!r}")


def make_statistic(cfg: ExperimentConfig):
    """``(points, n, seed) -> n^-1 H`` for the configured model and functional.

    Voronoi lengths are read on the diagram clipped to the density's box.
    """
    kind, fn = cfg.model["kind"], cfg.functional
    name = fn["name"]
    k, directed = int(cfg.model.get("k", 1)), bool(cfg.model.get("directed", False))
    dens = cfg.dens
    d = dens.dim

    if kind in GRAPH_KINDS:
        phi = cfg.phi if name == "weighted_length" else None
        pattern = PatternSpec.from_dict(fn["pattern"]) if name == "pattern" else None

        def stat(points, n, seed):
            clip = dens.box if kind == "voronoi" else None
            g = build_graph(kind, points, k=k, directed=directed, clip=clip)
            if name == "weighted_length":
                return weighted_length(g, phi, n ** (1.0 / d)) / n
            if name == "components":
                return component_count(g) / n
            return vertex_pattern_count(g, pattern) / n
        return stat

    if kind == "boolean":
        radius = cfg.radius
        order = fn.get("order")

        def stat(points, n, seed):
            scene = bm.build_scene(attach_marks(points, "radius", seed, radius), n)
            if name == "clumps":
                u, uk = bm.clump_counts(scene)
                return (u if order is None else uk.get(order, 0)) / n
            if name == "volume":
                return bm.volume(scene).value
            if name == "curvature":
                return bm.euler_curvature_2d(scene)[1] / n
            return bm.offline_packing(scene).M / n
        return stat

    if kind == "rsa":
        def stat(points, n, seed):
            return rsa_pack(attach_marks(points, "arrival", seed), n).N / n
        return stat

    xi = make_xi(cfg)

    def stat(points, n, seed):
        return h_xi(points, xi, n ** (1.0 / d)) / n
    return stat


def limit_value(cfg: ExperimentConfig) -> float | None:
    lim = cfg.limit
    if lim["source"] == "fixed":
        return float(lim["value"])
    return None
