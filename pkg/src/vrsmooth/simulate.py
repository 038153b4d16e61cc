"""Seeded Monte Carlo engine: MISE decomposition and efficiency summaries.

Each replication draws a fresh sample from its own deterministic RNG
stream, evaluates every configured estimator over the integration grid for
every bandwidth, and the aggregator reduces replications in index order so
the report is bit-identical regardless of how the work was scheduled.

The squared-error integral of each curve is split into integrated squared
bias (of the pointwise mean curve) and integrated variance (pointwise
spread around it); the two parts reassemble the mean integrated squared
error exactly, which the tests assert as an identity.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from .combine import VARIANTS
from .errors import ConfigError
from .estimators import estimate_curve
from .kernels import Kernel, nu_moment
from .bandwidth import variance_factor
from .inference import z_quantile
from .scenarios import Scenario, sample
from .smoother import SmootherConfig, local_linear_curve

#: fraction of failed grid points above which a replication is dropped
#: from the affected (estimator, bandwidth) cell
DROP_THRESHOLD = 0.05


def default_bandwidth_grid(count: int = 41, start: float = 0.008,
                           factor: float = 1.1) -> tuple[float, ...]:
    """Geometric bandwidth grid ``start * factor**k``."""
    return tuple(start * factor**k for k in range(count))


def rep_rng(seed: int, index: int) -> np.random.Generator:
    """Independent, scheduling-invariant RNG stream for one replication."""
    return np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


@dataclass(frozen=True)
class EstimatorSpec:
    """One estimator entering the study."""

    variant: str
    delta: float = 0.0
    r: float | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigError(
                f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if self.delta < 0.0:
            raise ConfigError(f"bin width must be nonnegative, got {self.delta}")
        if self.variant == "q":
            if self.r is None or not -1.0 < self.r < 1.0:
                raise ConfigError("variant 'q' needs a shift parameter with |r| < 1")

    @property
    def label(self) -> str:
        if self.variant == "ll":
            return "ll"
        if self.variant == "q":
            return f"q[r={self.r:g},d={self.delta:g}]"
        return f"{self.variant}[d={self.delta:g}]"


@dataclass(frozen=True)
class SimConfig:
    """Full description of one Monte Carlo study."""

    scenario: Scenario
    kernel: Kernel
    n: int
    estimators: tuple[EstimatorSpec, ...]
    bandwidths: tuple[float, ...] = field(default_factory=default_bandwidth_grid)
    replications: int = 300
    grid_size: int = 401
    seed: int = 0
    ridge: bool = True
    baseline: str = "ll"

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError(f"sample size must be positive, got {self.n}")
        if self.replications < 2:
            raise ConfigError("at least two replications are required")
        if self.grid_size < 2:
            raise ConfigError("integration grid needs at least two points")
        if self.seed < 0:
            raise ConfigError("seed must be a nonnegative integer")
        bw = tuple(float(h) for h in self.bandwidths)
        if len(bw) == 0 or any(h <= 0 for h in bw):
            raise ConfigError("bandwidths must be positive")
        if any(b <= a for a, b in zip(bw, bw[1:])):
            raise ConfigError("bandwidth grid must be strictly increasing")
        if not self.estimators:
            raise ConfigError("at least one estimator is required")
        labels = [e.label for e in self.estimators]
        if len(set(labels)) != len(labels):
            raise ConfigError(f"duplicate estimator labels: {labels}")
        if self.baseline not in labels:
            raise ConfigError(
                f"baseline {self.baseline!r} is not among the estimators {labels}")
        object.__setattr__(self, "bandwidths", bw)
        object.__setattr__(self, "estimators", tuple(self.estimators))


@dataclass(frozen=True)
class SimRow:
    """Aggregate results for one (estimator, bandwidth) cell."""

    estimator: str
    h: float
    mise: float
    isb: float
    iv: float
    mc_se: float
    reps_used: int
    failed_points: int


@dataclass(frozen=True)
class SimReport:
    """Study output: per-cell rows plus per-estimator summaries."""

    config: SimConfig
    rows: tuple[SimRow, ...]
    min_mise: dict
    argmin_h: dict
    efficiency: dict
    dropped: dict

    def as_dict(self) -> dict:
        def num(v):
            # keep the JSON document strictly parseable: NaN -> null
            return v if v is not None and np.isfinite(v) else None

        cfg = self.config
        return {
            "scenario": {
                "regression": cfg.scenario.regression.name,
                "design": cfg.scenario.design.name,
                "noise_k": cfg.scenario.noise_k,
                "sigma": cfg.scenario.sigma,
            },
            "kernel": cfg.kernel.name,
            "n": cfg.n,
            "replications": cfg.replications,
            "grid_size": cfg.grid_size,
            "seed": cfg.seed,
            "ridge": cfg.ridge,
            "baseline": cfg.baseline,
            "bandwidths": list(cfg.bandwidths),
            "estimators": [
                {"variant": e.variant, "delta": e.delta, "r": e.r,
                 "label": e.label}
                for e in cfg.estimators
            ],
            "rows": [
                {"estimator": r.estimator, "h": r.h, "mise": num(r.mise),
                 "isb": num(r.isb), "iv": num(r.iv), "mc_se": num(r.mc_se),
                 "reps_used": r.reps_used, "failed_points": r.failed_points}
                for r in self.rows
            ],
            "min_mise": {k: num(v) for k, v in self.min_mise.items()},
            "argmin_h": {k: num(v) for k, v in self.argmin_h.items()},
            "efficiency": {k: num(v) for k, v in self.efficiency.items()},
            "dropped": dict(self.dropped),
        }


def _fill_gaps(vals: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """Linear interpolation over isolated failed grid points."""
    bad = np.isnan(vals)
    if not bad.any():
        return vals
    good = ~bad
    out = vals.copy()
    out[bad] = np.interp(grid[bad], grid[good], vals[good])
    return out


def _replication(cfg: SimConfig, grid: np.ndarray, index: int):
    """Curves for one replication: array (estimators, bandwidths, grid)."""
    ds = sample(cfg.scenario, cfg.n, rep_rng(cfg.seed, index))
    ne, nh, ng = len(cfg.estimators), len(cfg.bandwidths), grid.size
    curves = np.empty((ne, nh, ng))
    fails = np.zeros((ne, nh), dtype=np.int64)
    for hi, h in enumerate(cfg.bandwidths):
        smcfg = SmootherConfig(cfg.kernel, h, ridge=cfg.ridge)
        for ei, est in enumerate(cfg.estimators):
            vals, _eff = estimate_curve(ds, smcfg, est.variant,
                                        delta=est.delta, r=est.r, points=grid)
            nbad = int(np.isnan(vals).sum())
            fails[ei, hi] = nbad
            if nbad > DROP_THRESHOLD * ng:
                curves[ei, hi] = np.nan  # cell dropped for this replication
            elif nbad:
                curves[ei, hi] = _fill_gaps(vals, grid)
            else:
                curves[ei, hi] = vals
    return curves, fails


def run_study(cfg: SimConfig, threads: int = 1) -> SimReport:
    """Run the full study.

    ``threads`` only sets the degree of parallelism; the aggregation order
    is fixed by replication index, so the report does not depend on it.
    """
    grid = np.linspace(0.0, 1.0, cfg.grid_size)
    truth = cfg.scenario.regression.m(grid)
    w = np.full(cfg.grid_size, grid[1] - grid[0])
    w[0] *= 0.5
    w[-1] *= 0.5

    ne, nh = len(cfg.estimators), len(cfg.bandwidths)
    ise = np.full((cfg.replications, ne, nh), np.nan)
    mean = np.zeros((ne, nh, cfg.grid_size))
    m2 = np.zeros((ne, nh, cfg.grid_size))
    count = np.zeros((ne, nh), dtype=np.int64)
    failed = np.zeros((ne, nh), dtype=np.int64)
    dropped = np.zeros((ne, nh), dtype=np.int64)

    work = partial(_replication, cfg, grid)
    if threads > 1:
        pool = ProcessPoolExecutor(max_workers=threads)
        results = pool.map(work, range(cfg.replications),
                           chunksize=max(1, cfg.replications // (threads * 8)))
    else:
        pool = None
        results = map(work, range(cfg.replications))

    try:
        for idx, (curves, fails) in enumerate(results):
            failed += fails
            for ei in range(ne):
                for hi in range(nh):
                    c = curves[ei, hi]
                    # cells are either gap-filled (finite) or marked all-NaN
                    if np.isnan(c[0]):
                        dropped[ei, hi] += 1
                        continue
                    ise[idx, ei, hi] = float(w @ ((c - truth) ** 2))
                    count[ei, hi] += 1
                    # streaming mean / squared-deviation update
                    delta1 = c - mean[ei, hi]
                    mean[ei, hi] += delta1 / count[ei, hi]
                    m2[ei, hi] += delta1 * (c - mean[ei, hi])
    finally:
        if pool is not None:
            pool.shutdown()

    rows = []
    min_mise, argmin_h = {}, {}
    for ei, est in enumerate(cfg.estimators):
        best = (np.inf, np.nan)
        for hi, h in enumerate(cfg.bandwidths):
            c = int(count[ei, hi])
            v = ise[:, ei, hi]
            v = v[~np.isnan(v)]
            if c == 0:
                row = SimRow(est.label, h, np.nan, np.nan, np.nan, np.nan,
                             0, int(failed[ei, hi]))
            else:
                mise = float(v.mean())
                isb = float(w @ ((mean[ei, hi] - truth) ** 2))
                iv = float(w @ (m2[ei, hi] / c))
                se = float(v.std(ddof=1) / np.sqrt(c)) if c > 1 else np.nan
                row = SimRow(est.label, h, mise, isb, iv, se, c,
                             int(failed[ei, hi]))
                if mise < best[0]:
                    best = (mise, h)
            rows.append(row)
        min_mise[est.label] = best[0] if np.isfinite(best[0]) else np.nan
        argmin_h[est.label] = best[1]

    base = min_mise.get(cfg.baseline, np.nan)
    efficiency = {}
    for est in cfg.estimators:
        m = min_mise[est.label]
        efficiency[est.label] = 1.0 if est.label == cfg.baseline else (
            base / m if np.isfinite(base) and np.isfinite(m) and m > 0 else np.nan)

    dropped_totals = {est.label: int(dropped[ei].sum())
                      for ei, est in enumerate(cfg.estimators)}
    return SimReport(cfg, tuple(rows), min_mise, argmin_h, efficiency,
                     dropped_totals)


def efficiency_table(reports, baseline: str = "ll") -> list[dict]:
    """Min-MISE efficiency rows across several study reports.

    Every report must contain the baseline estimator; each other estimator
    contributes one row keyed by the report's scenario and sample size.
    """
    out = []
    for rep in reports:
        cfg = rep.config
        if baseline not in rep.min_mise:
            raise ConfigError(
                f"report for {cfg.scenario.label} lacks baseline {baseline!r}")
        base = rep.min_mise[baseline]
        for est in cfg.estimators:
            m = rep.min_mise[est.label]
            eff = 1.0 if est.label == baseline else (
                base / m if np.isfinite(base) and np.isfinite(m) and m > 0
                else np.nan)
            out.append({
                "regression": cfg.scenario.regression.name,
                "design": cfg.scenario.design.name,
                "noise_k": cfg.scenario.noise_k,
                "n": cfg.n,
                "estimator": est.label,
                "efficiency": eff,
            })
    return out


def pointwise_variance_study(scenario: Scenario, kernel: Kernel, n: int,
                             h: float, x: float, delta: float,
                             replications: int, seed: int,
                             ridge: bool = True) -> dict:
    """Empirical pointwise moments of the plain and combined estimators."""
    cfg = SmootherConfig(kernel, h, ridge=ridge)
    pts = np.array([float(x)])
    vals = {k: np.empty(replications) for k in ("ll", "plus", "minus", "avg")}
    for i in range(replications):
        ds = sample(scenario, n, rep_rng(seed, i))
        vals["ll"][i] = local_linear_curve(ds, cfg, pts)[0]
        p, _ = estimate_curve(ds, cfg, "plus", delta=delta, points=pts)
        m, _ = estimate_curve(ds, cfg, "minus", delta=delta, points=pts)
        vals["plus"][i] = p[0]
        vals["minus"][i] = m[0]
        vals["avg"][i] = 0.5 * p[0] + 0.5 * m[0]
    truth = float(scenario.regression.m(np.array([x]))[0])
    return {
        "truth": truth,
        "mean": {k: float(v.mean()) for k, v in vals.items()},
        "var": {k: float(v.var(ddof=1)) for k, v in vals.items()},
        "se_mean": {k: float(v.std(ddof=1) / np.sqrt(replications))
                    for k, v in vals.items()},
    }


def coverage_study(scenario: Scenario, kernel: Kernel, n: int, h: float,
                   beta: float, points, replications: int, seed: int,
                   r: float, delta: float, ridge: bool = True) -> dict:
    """Empirical one-sided coverage of the plain and combined intervals.

    Coverage is recorded at each evaluation point and averaged; both
    intervals share the same studentiser, built from the plain fit.
    """
    pts = np.atleast_1d(np.asarray(points, dtype=float))
    cfg = SmootherConfig(kernel, h, ridge=ridge)
    z = z_quantile(beta)
    nu02 = nu_moment(kernel, 0, 2)
    truth = scenario.regression.m(pts)
    hits_ll = np.zeros(pts.size)
    hits_vr = np.zeros(pts.size)
    nufac_cache: dict[float, float] = {}
    for i in range(replications):
        ds = sample(scenario, n, rep_rng(seed, i))
        mh = local_linear_curve(ds, cfg, pts)
        mq, effs = estimate_curve(ds, cfg, "q", delta=delta, r=r, points=pts)
        d = pts[:, None] - ds.xs[None, :]
        kh = kernel(d / h) / h
        w010 = kh.mean(axis=1)
        s2 = (kh * (ds.ys[None, :] - mh[:, None]) ** 2).mean(axis=1) / w010
        nuv = np.empty(pts.size)
        for j, e in enumerate(effs):
            key = float(e)
            if key not in nufac_cache:
                nufac_cache[key] = variance_factor(kernel, "q", key, r)
            nuv[j] = nufac_cache[key]
        base = np.sqrt(s2 / w010 / (n * h))
        hits_ll += truth > mh - z * base * np.sqrt(nu02)
        hits_vr += truth > mq - z * base * np.sqrt(nuv)
    return {
        "points": pts,
        "coverage_ll": hits_ll / replications,
        "coverage_vr": hits_vr / replications,
        "mean_ll": float(hits_ll.mean() / replications),
        "mean_vr": float(hits_vr.mean() / replications),
    }
