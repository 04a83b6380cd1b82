"""Reproducible Monte Carlo harness over (n, density) grids.

Every trial is a pure function of ``(config, cell, trial)``: its seed is a
splitmix64 mix of the master seed, the cell index and the trial index, so
cells may run in any order or in parallel without changing the output.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from eok import bounds
from eok.errors import DomainError, EnumerationTimeout, InvariantViolation
from eok.factored import FactoredSolutions
from eok.formula import ModelParams, generate
from eok.geometry import min_cover_size
from eok.structure import build_H, formula_components, parity_consistent, path_via_formula_components, path_via_H

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

SCHEMA_VERSION = 1
ANALYSES = ("geometry", "holes", "covers", "hgraph", "paths")
_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def trial_seed(master_seed: int, cell: int, trial: int) -> int:
    return _splitmix64(_splitmix64(_splitmix64(master_seed & _MASK64) ^ cell) ^ trial)


@dataclass
class ExperimentConfig:
    densities: list[float]
    ns: list[int]
    k: int = 3
    epsilon: float = 0.5
    model: str = "counting"  # counting | constant_prob
    density_kind: str = "r"  # r: clause/variable ratio; p: raw clause probability
    counting_mode: str = "multinomial"
    trials: int = 10
    master_seed: int = 0
    analyses: list[str] = field(default_factory=lambda: ["geometry"])
    pair_cap: int = 2000
    hole_fraction: float = 0.6
    time_cap: float | None = None
    timings: bool = False

    def __post_init__(self):
        if not self.densities or not self.ns:
            raise DomainError("density and n grids must be non-empty")
        if self.trials < 0:
            raise DomainError("trials must be >= 0")
        if self.model not in ("counting", "constant_prob"):
            raise DomainError(f"unknown model {self.model!r}")
        if self.density_kind not in ("r", "p"):
            raise DomainError(f"unknown density kind {self.density_kind!r}")
        if self.model == "counting" and self.density_kind == "p":
            raise DomainError("the counting model takes r densities")
        bad = set(self.analyses) - set(ANALYSES)
        if bad:
            raise DomainError(f"unknown analyses {sorted(bad)}")
        self.densities = [float(x) for x in self.densities]
        self.ns = [int(x) for x in self.ns]

    @classmethod
    def from_toml(cls, text: str) -> ExperimentConfig:
        data = tomllib.loads(text)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise DomainError(f"unknown config keys {sorted(unknown)}")
        return cls(**data)

    def cells(self) -> list[tuple[int, float]]:
        return [(n, d) for n in self.ns for d in self.densities]


@dataclass
class TrialRecord:
    cell: int
    trial: int
    seed: int
    n: int
    density: float
    clauses: int
    truncated: bool = False
    satisfiable: bool | None = None
    solution_count: int | None = None
    # geometry
    min_overlap: float | None = None
    min_connect_l: int | None = None
    largest_formula_component: int | None = None
    # holes
    hole_min_size: int | None = None
    hole_count: int | None = None
    # covers
    cover_min: int | None = None
    # hgraph
    h_pairs: int | None = None
    largest_H_component: int | None = None
    h_bound_rate: float | None = None
    parity_failures: int | None = None
    # paths
    path_via_H_success_rate: float | None = None
    component_path_failures: int | None = None
    wall_time: float | None = None


_ANALYSIS_FIELDS = {
    "geometry": ["min_overlap", "min_connect_l", "largest_formula_component"],
    "holes": ["hole_min_size", "hole_count"],
    "covers": ["cover_min"],
    "hgraph": ["h_pairs", "largest_H_component", "h_bound_rate", "parity_failures"],
    "paths": ["h_pairs", "path_via_H_success_rate", "component_path_failures"],
}
_BASE_FIELDS = ["cell", "trial", "seed", "n", "density", "clauses", "truncated", "satisfiable", "solution_count"]


def record_columns(cfg: ExperimentConfig) -> list[str]:
    cols = list(_BASE_FIELDS)
    for name in ANALYSES:
        if name in cfg.analyses:
            cols += [c for c in _ANALYSIS_FIELDS[name] if c not in cols]
    if cfg.timings:
        cols.append("wall_time")
    return cols


def _params(cfg: ExperimentConfig, n: int, density: float, seed: int) -> ModelParams:
    if cfg.model == "counting":
        return ModelParams(n, cfg.k, cfg.epsilon, seed, r=density)
    p = density if cfg.density_kind == "p" else density * n / math.comb(n, cfg.k)
    return ModelParams(n, cfg.k, cfg.epsilon, seed, p=min(p, 1.0))


def _solution_pairs(fs: FactoredSolutions, cap: int, rng: np.random.Generator):
    count = fs.count
    if count * (count - 1) // 2 <= cap:
        sols = fs.materialize().solutions
        return [(sols[i], sols[j]) for i in range(len(sols)) for j in range(i + 1, len(sols))]
    pairs = []
    while len(pairs) < cap:
        a, b = fs.sample(rng), fs.sample(rng)
        if a != b:
            pairs.append((a, b))
    return pairs


def _check(deadline: float | None) -> None:
    if deadline is not None and time.monotonic() > deadline:
        raise EnumerationTimeout("per-trial time cap exceeded")


def run_trial(cfg: ExperimentConfig, cell: int, trial: int) -> TrialRecord:
    n, density = cfg.cells()[cell]
    seed = trial_seed(cfg.master_seed, cell, trial)
    start = time.perf_counter()
    f = generate(_params(cfg, n, density, seed), cfg.counting_mode)
    rec = TrialRecord(cell, trial, seed, n, density, f.m)
    deadline = None if cfg.time_cap is None else time.monotonic() + cfg.time_cap
    want = set(cfg.analyses)
    try:
        fs = FactoredSolutions(f, deadline=deadline)
        _check(deadline)
        rec.solution_count = fs.count
        rec.satisfiable = fs.count > 0
        if "geometry" in want:
            maxd = fs.max_distance()
            rec.min_overlap = None if maxd is None else (n - maxd) / n
            rec.min_connect_l = fs.min_connect_l()
            rec.largest_formula_component = formula_components(f).largest
            _check(deadline)
        if "holes" in want:
            rec.hole_min_size = math.ceil(cfg.hole_fraction * n)
            rec.hole_count = fs.hole_count(rec.hole_min_size)
            _check(deadline)
        if "covers" in want:
            rec.cover_min = min_cover_size(f)
            _check(deadline)
        if want & {"hgraph", "paths"}:
            _pair_analyses(cfg, rec, f, fs, np.random.default_rng(seed ^ 0x5A5A), deadline)
    except EnumerationTimeout:
        rec.truncated = True
    rec.wall_time = time.perf_counter() - start
    return rec


def _pair_analyses(cfg, rec, f, fs, rng, deadline) -> None:
    pairs = _solution_pairs(fs, cfg.pair_cap, rng) if fs.count >= 2 else []
    rec.h_pairs = len(pairs)
    c = bounds.shattering_c(rec.density, cfg.epsilon, cfg.k) if cfg.model == "counting" else None
    limit = bounds.lambda_c(c) * math.log(rec.n) if c is not None and c < 1 else None
    largest, within, parity_bad, ok_paths, comp_bad = 0, 0, 0, 0, 0
    for t, (a, b) in enumerate(pairs):
        if not t & 63:
            _check(deadline)
        h = build_H(f, a, b)
        if "hgraph" in cfg.analyses:
            comp = h.largest_component()
            largest = max(largest, comp)
            within += limit is not None and comp <= limit
            parity_bad += not parity_consistent(h)
        if "paths" in cfg.analyses:
            try:
                ok_paths += path_via_H(f, a, b).valid
            except InvariantViolation:
                pass
            try:
                path_via_formula_components(f, a, b)
            except InvariantViolation:
                comp_bad += 1
    if "hgraph" in cfg.analyses:
        rec.largest_H_component = largest if pairs else None
        rec.h_bound_rate = within / len(pairs) if pairs and limit is not None else None
        rec.parity_failures = parity_bad
    if "paths" in cfg.analyses:
        rec.path_via_H_success_rate = ok_paths / len(pairs) if pairs else None
        rec.component_path_failures = comp_bad


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    records: list[TrialRecord]
    aggregates: list[dict]
    fits: list[dict]

    def to_csv(self) -> str:
        cols = record_columns(self.config)
        out = io.StringIO()
        out.write(f"# eok-experiment schema={SCHEMA_VERSION}\n")
        w = csv.writer(out, lineterminator="\n")
        w.writerow(cols)
        for r in self.records:
            w.writerow([_fmt(getattr(r, c)) for c in cols])
        return out.getvalue()

    def aggregates_csv(self) -> str:
        out = io.StringIO()
        out.write(f"# eok-experiment-aggregates schema={SCHEMA_VERSION}\n")
        if self.aggregates:
            cols = list(self.aggregates[0])
            w = csv.writer(out, lineterminator="\n")
            w.writerow(cols)
            for row in self.aggregates:
                w.writerow([_fmt(row[c]) for c in cols])
        return out.getvalue()

    def to_json(self) -> str:
        cols = record_columns(self.config)
        payload = {
            "schema": SCHEMA_VERSION,
            "config": asdict(self.config),
            "records": [{c: getattr(r, c) for c in cols} for r in self.records],
            "aggregates": self.aggregates,
            "fits": self.fits,
        }
        return json.dumps(payload, indent=1, sort_keys=False) + "\n"


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _mean(xs):
    xs = [x for x in xs if x is not None]
    return sum(xs) / len(xs) if xs else None


def aggregate(cfg: ExperimentConfig, records: list[TrialRecord]) -> tuple[list[dict], list[dict]]:
    rows = []
    for cell, (n, density) in enumerate(cfg.cells()):
        rs = [r for r in records if r.cell == cell]
        done = [r for r in rs if not r.truncated]
        sat = [r for r in done if r.satisfiable]
        row = {
            "cell": cell, "n": n, "density": density, "trials": len(rs),
            "truncated": len(rs) - len(done),
            "sat_freq": len(sat) / len(done) if done else None,
            "mean_solution_count": _mean([r.solution_count for r in done]),
        }
        if "geometry" in cfg.analyses:
            row["mean_min_overlap"] = _mean([r.min_overlap for r in sat])
            row["mean_min_connect_l"] = _mean([r.min_connect_l for r in sat])
            row["max_min_connect_l"] = max((r.min_connect_l for r in sat if r.min_connect_l is not None),
                                           default=None)
            row["mean_largest_formula_component"] = _mean([r.largest_formula_component for r in done])
        if "holes" in cfg.analyses:
            row["total_holes"] = sum(r.hole_count or 0 for r in done)
        if "covers" in cfg.analyses:
            row["mean_cover_min"] = _mean([r.cover_min for r in done])
        if "hgraph" in cfg.analyses:
            row["max_largest_H_component"] = max((r.largest_H_component for r in sat
                                                  if r.largest_H_component is not None), default=None)
            row["mean_h_bound_rate"] = _mean([r.h_bound_rate for r in sat])
        if "paths" in cfg.analyses:
            row["mean_path_via_H_success_rate"] = _mean([r.path_via_H_success_rate for r in sat])
        rows.append(row)

    fits = []
    metrics = [m for m in ("mean_min_connect_l", "mean_largest_formula_component", "max_largest_H_component")
               if rows and m in rows[0]]
    for density in cfg.densities:
        for metric in metrics:
            pts = [(math.log(r["n"]), r[metric]) for r in rows
                   if r["density"] == density and r[metric] is not None]
            coef = None
            if pts and any(x > 0 for x, _ in pts):
                # least squares through the origin: metric ~ coef * ln n
                coef = sum(x * y for x, y in pts) / sum(x * x for x, _ in pts)
            fits.append({"density": density, "metric": metric, "log_n_coefficient": coef, "points": len(pts)})
    return rows, fits


def _job(args):
    cfg, cell, trial = args
    return run_trial(cfg, cell, trial)


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("EOK_THREADS", "1")))
    except ValueError:
        return 1


def run_experiment(cfg: ExperimentConfig, workers: int | None = None) -> ExperimentReport:
    jobs = [(cfg, cell, t) for cell in range(len(cfg.cells())) for t in range(cfg.trials)]
    workers = worker_count() if workers is None else workers
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_job, jobs, chunksize=max(1, len(jobs) // (8 * workers))))
    else:
        records = [_job(j) for j in jobs]
    records.sort(key=lambda r: (r.cell, r.trial))
    rows, fits = aggregate(cfg, records)
    return ExperimentReport(cfg, records, rows, fits)
