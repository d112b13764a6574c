"""Limits of stabilizing functionals: origin samples on Poisson windows,
Monte Carlo constants, the density integral, coupling curves and
finite-n convergence tables.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.stats import norm

from .functionals import WeightFn, Xi, edge_xi
from .point_process import (Density, MarkedPointSet, derive_seed, rejection_sample,
                            sample_binomial, sample_coupled_pair, sample_poisson, stream)
from .spatial import Window


class Unstabilized(RuntimeError):
    pass


@dataclass(frozen=True)
class StabilizationProbe:
    """Nested window radii (in units of tau^(-1/d)) and perturbation probes."""

    radii: tuple = (1.0, 2.0, 4.0, 8.0, 16.0)
    probes: int = 8
    match_rule: str = "signature"   # or "value"
    tol: float = 1e-9
    insert_count: int = 5
    cluster_radius: float = 0.25

    def __post_init__(self):
        r = list(self.radii)
        if len(r) < 2 or any(b <= a for a, b in zip(r, r[1:])) or r[0] <= 0:
            raise ValueError("window schedule must be positive and strictly increasing, "
                             "with at least two levels")
        if self.probes < 1:
            raise ValueError("probe count must be >= 1")
        if self.match_rule not in ("signature", "value"):
            raise ValueError(f"unknown match rule {self.match_rule!r}")

    def scaled(self, tau: float, d: int) -> np.ndarray:
        return np.asarray(self.radii, float) * tau ** (-1.0 / d)

    def to_dict(self) -> dict:
        return {"radii": list(self.radii), "probes": self.probes, "match_rule": self.match_rule,
                "tol": self.tol, "insert_count": self.insert_count,
                "cluster_radius": self.cluster_radius}


@dataclass
class XiInfinitySample:
    value: float
    stabilized: bool
    R_hat: float | None
    level_values: list = field(default_factory=list)


@dataclass
class EstimateResult:
    mean: float
    stderr: float
    replicates: int            # samples used (stabilized ones)
    confidence: float
    interval: tuple
    attempted: int = 0
    unstabilized_fraction: float = 0.0

    def to_dict(self) -> dict:
        return {"mean": self.mean, "stderr": self.stderr, "replicates": self.replicates,
                "confidence": self.confidence, "interval": list(self.interval),
                "attempted": self.attempted,
                "unstabilized_fraction": self.unstabilized_fraction}


def summarize(values, confidence: float = 0.95, attempted: int | None = None) -> EstimateResult:
    v = np.asarray(values, float)
    m = len(v)
    if m == 0:
        raise Unstabilized("no stabilized samples")
    mean = float(v.mean())
    se = float(v.std(ddof=1) / math.sqrt(m)) if m > 1 else 0.0
    z = float(norm.ppf(0.5 + confidence / 2))
    attempted = m if attempted is None else attempted
    return EstimateResult(mean, se, m, confidence, (mean - z * se, mean + z * se), attempted,
                          1.0 - m / attempted if attempted else 0.0)


def _map(fn, items, threads: int):
    """Ordered map, optionally on a thread pool."""
    if threads == 1:
        return [fn(i) for i in items]
    workers = (os.cpu_count() or 1) if threads == 0 else threads
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ------------------------------------------------------- origin sampling

def _origin_first(points: np.ndarray) -> np.ndarray:
    # sample_poisson appends the origin last; the detector wants it at row 0
    return np.vstack([points[-1:], points[:-1]])


def _same(a, b, rule: str, tol: float) -> bool:
    va, sa = a
    vb, sb = b
    if not math.isclose(va, vb, rel_tol=tol, abs_tol=tol):
        return False
    if rule == "signature" and sa is not None and sb is not None:
        return sa == sb
    return True


def _eval(xi: Xi, cfg: MarkedPointSet):
    # levels too small to build the structure (e.g. fewer than k+1 points) never match
    try:
        return xi.at(cfg, 0)
    except ValueError:
        return math.nan, None


def _annulus_points(rng, d: int, r_in: float, r_out: float, m: int) -> np.ndarray:
    u = rng.standard_normal((m, d))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    rad = (r_in**d + (r_out**d - r_in**d) * rng.random(m)) ** (1.0 / d)
    return u * rad[:, None]


def xi_infinity_sample(xi: Xi, tau: float, probe: StabilizationProbe, seed: int,
                       d: int = 2) -> XiInfinitySample:
    """One draw of xi at the origin of P_{tau,0}, with an empirical stabilization check.

    The value is read on nested balls B(0; m).  The candidate radius R_hat
    is the smallest level from which every larger level gives the same
    value (and origin signature); it must sit below the top level.  Then
    ``probe.probes`` perturbations confined to R_hat < |x| <= m_max (uniform
    insertions, clustered insertions just outside R_hat, random deletions)
    must leave the top-level value unchanged.  If a probe changes it, the
    next larger candidate is tried.
    """
    if not tau > 0:
        raise ValueError("tau must be positive")
    radii = probe.scaled(tau, d)
    m_max = radii[-1]
    pts = _origin_first(sample_poisson(tau, Window.ball(np.zeros(d), m_max),
                                       stream(seed, "xi-window"), with_origin=True))
    marks_rng = stream(seed, "xi-marks")
    cfg = xi.marks.draw(pts, marks_rng) if xi.marks is not None else MarkedPointSet(pts)
    dist = np.linalg.norm(pts, axis=1)

    levels = [_eval(xi, cfg.subset(dist <= m)) for m in radii]
    top = levels[-1]
    first = len(levels) - 1
    while first > 0 and _same(levels[first - 1], top, probe.match_rule, probe.tol):
        first -= 1
    values = [v for v, _ in levels]
    if first == len(levels) - 1:
        return XiInfinitySample(top[0], False, None, values)

    prng = stream(seed, "xi-probes")
    unit = tau ** (-1.0 / d)
    for L in range(first, len(levels) - 1):
        R = radii[L]
        ok = True
        for j in range(probe.probes):
            kind = j % 3
            if kind == 2:
                drop = (dist > R) & (prng.random(len(pts)) < 0.5)
                trial = cfg.subset(~drop)
            else:
                if kind == 0:
                    add = _annulus_points(prng, d, R, m_max, probe.insert_count)
                else:
                    c = _annulus_points(prng, d, R + 2 * probe.cluster_radius * unit,
                                        R + 2 * probe.cluster_radius * unit, 1)[0]
                    add = c + _annulus_points(prng, d, 0.0, probe.cluster_radius * unit,
                                              probe.insert_count)
                    add = add[np.linalg.norm(add, axis=1) > R]
                extra = xi.marks.draw(add, prng) if xi.marks is not None else MarkedPointSet(add)
                trial = cfg.concat(extra)
            if not _same(_eval(xi, trial), top, probe.match_rule, probe.tol):
                ok = False
                break
        if ok:
            return XiInfinitySample(top[0], True, float(R), values)
    return XiInfinitySample(top[0], False, None, values)


def estimate_E_xi_infinity(xi: Xi, tau: float, probe: StabilizationProbe, replicates: int,
                           seed: int, d: int = 2, threads: int = 1,
                           confidence: float = 0.95) -> EstimateResult:
    """Mean of xi_infinity(P_tau) over stabilized replicates."""
    if replicates < 2:
        raise ValueError("need at least 2 replicates")
    samples = _map(lambda r: xi_infinity_sample(xi, tau, probe, derive_seed(seed, "xi-inf", r), d),
                   range(replicates), threads)
    vals = [s.value for s in samples if s.stabilized]
    if not vals:
        raise Unstabilized("no replicate stabilized within the window schedule")
    return summarize(vals, confidence, replicates)


def limiting_constant_C(kind: str, phi: WeightFn, d: int, probe: StabilizationProbe,
                        replicates: int, seed: int, k: int = 1, directed: bool = False,
                        threads: int = 1) -> EstimateResult:
    """Half the phi-weighted edge sum at the origin of G(P_{1,0}) (in-edges if directed)."""
    return estimate_E_xi_infinity(edge_xi(kind, phi, k, directed), 1.0, probe, replicates,
                                  seed, d, threads)


def rhs_integral(density: Density, xi: Xi, probe: StabilizationProbe, outer_samples: int,
                 inner_replicates: int, seed: int, shortcut: bool | None = None,
                 threads: int = 1) -> EstimateResult:
    """Integral of E[xi_infinity(P_f(x))] f(x) dx.

    With a homogeneity order gamma (and ``shortcut`` not False) this is
    E[xi_infinity(P_1)] * E_f[f^(-gamma/d)], the second factor by sampling
    from f.  Otherwise the nested estimator averages inner estimates at
    tau = f(x) over x ~ f.
    """
    if outer_samples < 1:
        raise ValueError("outer_samples must be >= 1")
    d = density.dim
    xs = rejection_sample(density, outer_samples, stream(seed, "rhs-outer"))
    fx = density.pdf(xs)
    if np.any(fx <= 0):
        raise ValueError("density vanished at a sampled point")
    gamma = xi.homogeneity
    if shortcut is None:
        shortcut = gamma is not None
    if shortcut:
        if gamma is None:
            raise ValueError("shortcut needs a homogeneity order")
        e1 = estimate_E_xi_infinity(xi, 1.0, probe, inner_replicates, derive_seed(seed, "rhs-e1"),
                                    d, threads)
        w = fx ** (-gamma / d)
        integral = float(w.mean())
        se_i = float(w.std(ddof=1) / math.sqrt(len(w))) if len(w) > 1 else 0.0
        mean = e1.mean * integral
        se = math.sqrt((integral * e1.stderr) ** 2 + (e1.mean * se_i) ** 2)
        z = float(norm.ppf(0.5 + e1.confidence / 2))
        return EstimateResult(mean, se, e1.replicates, e1.confidence,
                              (mean - z * se, mean + z * se), e1.attempted,
                              e1.unstabilized_fraction)

    def inner(i):
        return estimate_E_xi_infinity(xi, float(fx[i]), probe, inner_replicates,
                                      derive_seed(seed, "rhs-inner", i), d)
    per_x, attempted, used = [], 0, 0
    for i in range(outer_samples):
        try:
            est = inner(i)
        except Unstabilized:
            attempted += inner_replicates
            continue
        per_x.append(est.mean)
        attempted += est.attempted
        used += est.replicates
    if not per_x:
        raise Unstabilized("no inner estimate stabilized")
    res = summarize(per_x)
    if len(per_x) == 1:
        res.stderr = est.stderr
    res.attempted = attempted
    res.unstabilized_fraction = 1.0 - used / attempted
    return res


# -------------------------------------------------------------- coupling

@dataclass
class CouplingRow:
    n: int
    p: float
    stderr: float
    replicates: int


def coupling_curve(density: Density, K: float, n_grid, replicates: int, seed: int,
                   threads: int = 1) -> list[CouplingRow]:
    """Fraction of coupled pairs whose B(0;K) restrictions coincide exactly."""
    if not K > 0:
        raise ValueError("K must be positive")
    rows = []
    for n in n_grid:
        hits = _map(lambda r: sample_coupled_pair(density, int(n), K,
                                                  derive_seed(seed, f"couple/{n}", r)).matched,
                    range(replicates), threads)
        p = float(np.mean(hits))
        rows.append(CouplingRow(int(n), p, math.sqrt(p * (1 - p) / replicates), replicates))
    return rows


# ----------------------------------------------------------- convergence

@dataclass
class ConvergenceRow:
    n: int
    mean: float
    stderr: float
    abs_error: float | None
    l2_error: float | None
    replicates: int


FiniteStatistic = Callable[[np.ndarray, int, int], float]


def finite_replicates(density: Density, statistic: FiniteStatistic, n: int, replicates: int,
                      seed: int, threads: int = 1, tag: str = "converge") -> np.ndarray:
    """n^-1 H evaluated on independent binomial samples (one stream per replicate)."""
    def one(r):
        s = derive_seed(seed, f"{tag}/{n}", r)
        return statistic(sample_binomial(density, n, s), n, s)
    return np.asarray(_map(one, range(replicates), threads), float)


def convergence_experiment(density: Density, statistic: FiniteStatistic, n_grid,
                           replicates: int, seed: int, limit: float | None = None,
                           threads: int = 1) -> list[ConvergenceRow]:
    """Replicate means of a normalized statistic along an n grid, with errors
    against ``limit`` when one is given."""
    rows = []
    for n in n_grid:
        v = finite_replicates(density, statistic, int(n), replicates, seed, threads)
        se = float(v.std(ddof=1) / math.sqrt(len(v))) if len(v) > 1 else 0.0
        if limit is None:
            ae = l2 = None
        else:
            ae = float(abs(v.mean() - limit))
            l2 = float(math.sqrt(np.mean((v - limit) ** 2)))
        rows.append(ConvergenceRow(int(n), float(v.mean()), se, ae, l2, len(v)))
    return rows
