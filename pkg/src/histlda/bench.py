"""Synthetic three-component benchmark and integrated squared error.

Each unit mixes a Normal(1, 0.1), an Exponential(rate 2) and a
Uniform[1, 1.5] with weights drawn from a flat Dirichlet. Draws falling
outside the range are redrawn from the same component, and the reference
density is the matching mixture of range-truncated, renormalized
components, so generator and truth agree exactly.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .baselines import br_histogram, knuth_histogram
from .gibbs import FitConfig, fit, unit_density
from .histogram import Histogram, Range, breakpoints, density
from .model import Collection
from .numerics import Rng, child_rng

log = logging.getLogger(__name__)

METHODS = ("histlda", "knuth", "br")

NORMAL_MEAN, NORMAL_SD = 1.0, 0.1
EXP_RATE = 2.0
UNIF_LO, UNIF_HI = 1.0, 1.5


@dataclass(frozen=True)
class SyntheticSpec:
    range: Range = Range(0.0, 2.0)
    units: int = 100
    per_unit: int = 100
    dirichlet_concentration: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.units < 1 or self.per_unit < 1:
            raise ValueError("units and per_unit must be >= 1")
        if not self.dirichlet_concentration > 0:
            raise ValueError("dirichlet_concentration must be positive")


def _phi(x: float) -> float:
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def component_masses(rng: Range) -> np.ndarray:
    """Probability each untruncated component puts on [t0, t1)."""
    z_norm = _phi((rng.t1 - NORMAL_MEAN) / NORMAL_SD) - _phi((rng.t0 - NORMAL_MEAN) / NORMAL_SD)
    lo = max(rng.t0, 0.0)
    z_exp = math.exp(-EXP_RATE * lo) - math.exp(-EXP_RATE * rng.t1) if rng.t1 > 0 else 0.0
    z_unif = max(0.0, min(rng.t1, UNIF_HI) - max(rng.t0, UNIF_LO)) / (UNIF_HI - UNIF_LO)
    return np.array([z_norm, z_exp, z_unif])


def _draw_component(c: int, n: int, rng: Rng) -> np.ndarray:
    if c == 0:
        return rng.normal(NORMAL_MEAN, NORMAL_SD, n)
    if c == 1:
        return rng.exponential(1.0 / EXP_RATE, n)
    return rng.uniform(UNIF_LO, UNIF_HI, n)


def _draw_truncated(c: int, n: int, t_range: Range, rng: Rng) -> np.ndarray:
    out = _draw_component(c, n, rng)
    bad = ~t_range.contains(out)
    while bad.any():
        out[bad] = _draw_component(c, int(bad.sum()), rng)
        bad = ~t_range.contains(out)
    return out


def generate_collection(spec: SyntheticSpec, rng: Rng, weights: np.ndarray | None = None):
    """Sample a collection and the per-unit mixing weights (``units x 3``).

    ``weights`` overrides the Dirichlet draw, e.g. to force a single component.
    """
    masses = component_masses(spec.range)
    if weights is None:
        weights = rng.dirichlet(np.full(3, spec.dirichlet_concentration), size=spec.units)
    weights = np.asarray(weights, dtype=np.float64).reshape(spec.units, 3)
    if np.any((weights > 0) & (masses == 0)):
        raise ValueError("a weighted component has no mass inside the range")
    per_unit = []
    for u in range(spec.units):
        comp = rng.choice(3, size=spec.per_unit, p=weights[u])
        t = np.empty(spec.per_unit)
        for c in range(3):
            sel = comp == c
            if sel.any():
                t[sel] = _draw_truncated(c, int(sel.sum()), spec.range, rng)
        assert spec.range.contains(t).all()
        per_unit.append(t)
    return Collection.from_units(per_unit, spec.range), weights


def true_density(weights, t, rng: Range):
    """Truncated-and-renormalized mixture density at ``t``."""
    t_arr = np.asarray(t, dtype=np.float64)
    rng.check(t_arr)
    w = np.asarray(weights, dtype=np.float64)
    z = component_masses(rng)
    out = np.zeros(t_arr.shape)
    if w[0] > 0:
        pdf = np.exp(-0.5 * ((t_arr - NORMAL_MEAN) / NORMAL_SD) ** 2) / (NORMAL_SD * math.sqrt(2 * math.pi))
        out = out + w[0] * pdf / z[0]
    if w[1] > 0:
        pdf = np.where(t_arr >= 0, EXP_RATE * np.exp(-EXP_RATE * np.maximum(t_arr, 0.0)), 0.0)
        out = out + w[1] * pdf / z[1]
    if w[2] > 0:
        pdf = np.where((t_arr >= UNIF_LO) & (t_arr <= UNIF_HI), 1.0 / (UNIF_HI - UNIF_LO), 0.0)
        out = out + w[2] * pdf / z[2]
    return float(out) if out.ndim == 0 else out


def ise(estimated: Callable, truth: Callable, rng: Range, grid_points: int = 2001) -> float:
    """Trapezoid-rule integral of ``(estimated - truth)^2`` over the range.

    Both callables take an array of points. The last grid point sits one ulp
    below t1.
    """
    if grid_points < 2:
        raise ValueError("grid_points must be >= 2")
    x = np.linspace(rng.t0, rng.t1, grid_points)
    g = rng.grid(grid_points)
    d = np.asarray(estimated(g), dtype=np.float64) - np.asarray(truth(g), dtype=np.float64)
    return float(np.trapezoid(d * d, x))


def ise_piecewise(a, b) -> float:
    """Exact squared-error integral between two piecewise-constant densities."""
    fa = (lambda t: density(a, t)) if isinstance(a, Histogram) else a
    fb = (lambda t: density(b, t)) if isinstance(b, Histogram) else b
    rng = a.range
    edges = np.unique(np.concatenate([breakpoints(a), breakpoints(b)]))
    edges = edges[(edges >= rng.t0) & (edges <= rng.t1)]
    mids = 0.5 * (edges[:-1] + edges[1:])
    d = np.asarray(fa(mids)) - np.asarray(fb(mids))
    return float(np.sum(d * d * np.diff(edges)))


# ------------------------------------------------------------ benchmark


@dataclass
class BenchmarkReport:
    rows: list[dict]
    config: dict
    summary: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.summary:
            self.summary = self._summarize()

    def _summarize(self) -> dict:
        out: dict = {}
        for method in dict.fromkeys(r["method"] for r in self.rows):
            out[method] = {}
            for m in dict.fromkeys(r["m"] for r in self.rows):
                vals = np.array([r["ise"] for r in self.rows if r["method"] == method and r["m"] == m and r["ise"] is not None])
                out[method][str(m)] = {
                    "mean_ise": float(vals.mean()) if vals.size else None,
                    "std_ise": float(vals.std(ddof=1)) if vals.size > 1 else (0.0 if vals.size else None),
                    "replicates": int(vals.size),
                }
        return out

    def mean_ise(self, method: str, m: int) -> float:
        return self.summary[method][str(m)]["mean_ise"]

    def to_json(self) -> str:
        return json.dumps(
            {"config": self.config, "summary": self.summary, "rows": self.rows},
            indent=2, sort_keys=True,
        ) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["method", "m", "replicate", "ise", "runtime_ms"])
        for r in self.rows:
            wr.writerow([
                r["method"], r["m"], r["replicate"],
                "nan" if r["ise"] is None else repr(r["ise"]),
                "" if r["runtime_ms"] is None else repr(r["runtime_ms"]),
            ])
        return buf.getvalue()


def _method_ise(method: str, c: Collection, truth_w: np.ndarray, cfg: FitConfig, fit_rng: Rng) -> float:
    rng = c.range
    per_unit = []
    if method == "histlda":
        result = fit(c, cfg, rng=fit_rng)
        for u in range(c.n_units):
            est = unit_density(result, u + 1)
            per_unit.append(ise(est, lambda t, w=truth_w[u]: true_density(w, t, rng), rng))
    else:
        build = knuth_histogram if method == "knuth" else br_histogram
        for u in range(c.n_units):
            h = build(c.unit_values(u), rng, cfg.w_max)
            per_unit.append(ise(lambda t, h=h: density(h, t), lambda t, w=truth_w[u]: true_density(w, t, rng), rng))
    return float(np.mean(per_unit))


def _run_cell(args) -> list[dict]:
    spec, methods, m, rep, cfg, record_runtime = args
    cell_spec = SyntheticSpec(spec.range, spec.units, m, spec.dirichlet_concentration, spec.seed)
    c, truth_w = generate_collection(cell_spec, child_rng(spec.seed, m, rep, 0))
    rows = []
    for method in methods:
        start = time.perf_counter()
        try:
            value, err = _method_ise(method, c, truth_w, cfg, child_rng(spec.seed, m, rep, 1)), None
        except Exception as exc:  # a failed cell is reported, not fatal
            log.warning("benchmark cell %s m=%d rep=%d failed: %s", method, m, rep, exc)
            value, err = None, f"{type(exc).__name__}: {exc}"
        elapsed = (time.perf_counter() - start) * 1e3
        rows.append({
            "method": method, "m": m, "replicate": rep, "ise": value,
            "runtime_ms": round(elapsed, 3) if record_runtime else None, "error": err,
        })
    return rows


def run_benchmark(
    spec: SyntheticSpec,
    methods: Sequence[str] = METHODS,
    m_values: Sequence[int] = (50, 100, 150, 200, 250, 300),
    replicates: int = 3,
    fit_cfg: FitConfig | None = None,
    n_jobs: int = 1,
    record_runtime: bool = False,
) -> BenchmarkReport:
    """ISE of each method for every (m, replicate) cell.

    Cell (m, r) draws its data and its sampler stream from child streams of
    ``spec.seed`` keyed by (m, r), so the report does not depend on
    ``n_jobs`` or on which other m values are requested. Wall-clock times
    are only recorded with ``record_runtime`` since they break byte-level
    reproducibility of the report.
    """
    unknown = [m for m in methods if m not in METHODS]
    if unknown:
        raise ValueError(f"unknown method(s) {unknown}; valid: {', '.join(METHODS)}")
    if replicates < 1 or not m_values:
        raise ValueError("need at least one replicate and one m value")
    fit_cfg = FitConfig() if fit_cfg is None else fit_cfg
    tasks = [(spec, tuple(methods), int(m), r, fit_cfg, record_runtime) for m in m_values for r in range(replicates)]
    if n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(_run_cell, tasks))
    else:
        results = [_run_cell(t) for t in tasks]
    rows = [row for cell in results for row in cell]
    rows.sort(key=lambda r: (METHODS.index(r["method"]), r["m"], r["replicate"]))
    config = {
        "spec": {**asdict(spec), "range": [spec.range.t0, spec.range.t1]},
        "methods": list(methods),
        "m_values": [int(m) for m in m_values],
        "replicates": replicates,
        "fit": fit_cfg.to_dict(),
    }
    return BenchmarkReport(rows, config)
