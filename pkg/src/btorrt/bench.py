"""Benchmark harness: repeated seeded trials, per-trial records and
per-group statistics."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import time
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .optimize import DEFAULT_UPSAMPLE_ITERS, PipelineResult, optimize_path
from .planning import PLANNERS, PlanConfig, PlanResult

CSV_COLUMNS = (
    "algorithm",
    "map_id",
    "seed",
    "success",
    "raw_cost",
    "downsample_cost",
    "upsample_cost",
    "smooth_length",
    "nodes_total",
    "wall_time_ms",
    "iterations_used",
)
STAT_FIELDS = CSV_COLUMNS[4:]
OPTIMIZED = frozenset({"bto_rrt"})


@dataclass(frozen=True)
class TrialRecord:
    algorithm: str
    map_id: str
    seed: int
    success: bool
    raw_cost: float | None = None
    downsample_cost: float | None = None
    upsample_cost: float | None = None
    smooth_length: float | None = None
    nodes_total: int | None = None
    wall_time_ms: float | None = None
    iterations_used: int | None = None

    @property
    def cost(self) -> float | None:
        """Best cost the trial produced: up-sampled when optimized, else raw."""
        return self.upsample_cost if self.upsample_cost is not None else self.raw_cost

    def to_row(self) -> dict[str, str]:
        row = {}
        for name in CSV_COLUMNS:
            v = getattr(self, name)
            if v is None:
                row[name] = ""
            elif isinstance(v, bool):
                row[name] = "true" if v else "false"
            elif isinstance(v, float):
                row[name] = repr(v)
            else:
                row[name] = str(v)
        return row

    @classmethod
    def from_row(cls, row: dict[str, str]) -> TrialRecord:
        types = {f.name: f.type for f in fields(cls)}
        kw = {}
        for name in CSV_COLUMNS:
            text = row[name]
            if text == "":
                kw[name] = None
            elif name == "success":
                if text not in ("true", "false"):
                    raise ValueError(f"success must be true/false, got {text!r}")
                kw[name] = text == "true"
            elif types[name].startswith("int"):
                kw[name] = int(text)
            elif types[name].startswith("float"):
                kw[name] = float(text)
            else:
                kw[name] = text
        return cls(**kw)


@dataclass(frozen=True)
class MapCase:
    """A workspace with its start and goal, named for the records."""

    map_id: str
    ws: object
    start: np.ndarray
    goal: np.ndarray


@dataclass
class Solution:
    result: PlanResult
    pipeline: PipelineResult | None
    wall_time: float


def trial_seed(base_seed: int, map_id: str, algorithm: str, trial: int) -> int:
    """Independent per-trial seed from a hash of the trial's identity."""
    key = f"{base_seed}|{map_id}|{algorithm}|{trial}".encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "big") >> 1


def pipeline_rng(seed: int) -> np.random.Generator:
    # a stream separate from the planner's, which uses ``seed`` directly
    return np.random.default_rng([seed, 1])


def solve(
    case: MapCase,
    algorithm: str,
    cfg: PlanConfig,
    optimize: bool = True,
    upsample_iters: int = DEFAULT_UPSAMPLE_ITERS,
    sample_spacing: float | None = None,
) -> Solution:
    """Plan, then (if asked and a path exists) run the optimizer."""
    if algorithm not in PLANNERS:
        raise ValueError(f"unknown algorithm {algorithm!r}; choose from {', '.join(PLANNERS)}")
    t0 = time.perf_counter()
    result = PLANNERS[algorithm](case.ws, case.start, case.goal, cfg)
    pipeline = None
    if optimize and result.success:
        pipeline = optimize_path(
            result.path,
            case.ws,
            pipeline_rng(cfg.rng_seed),
            upsample_iters=upsample_iters,
            sample_spacing=sample_spacing,
            step_size=cfg.step_size,
        )
    return Solution(result, pipeline, time.perf_counter() - t0)


def _record(case: MapCase, algorithm: str, seed: int, sol: Solution, timing: bool) -> TrialRecord:
    res = sol.result
    kw = dict(
        algorithm=algorithm,
        map_id=case.map_id,
        seed=seed,
        success=res.success,
        nodes_total=res.nodes_total,
        iterations_used=res.iterations_used,
        wall_time_ms=sol.wall_time * 1000.0 if timing else None,
    )
    if res.success:
        kw["raw_cost"] = res.cost
        if sol.pipeline is not None:
            s = sol.pipeline.summary()
            kw["downsample_cost"] = s["downsample_cost"]
            kw["upsample_cost"] = s["upsample_cost"]
            kw["smooth_length"] = s["smooth_length"]
    return TrialRecord(**kw)


def _run_one(job) -> tuple[tuple, TrialRecord]:
    case, algorithm, trial, cfg, upsample_iters, timing = job
    seed = trial_seed(cfg.rng_seed, case.map_id, algorithm, trial)
    trial_cfg = replace(cfg, rng_seed=seed)
    sol = solve(case, algorithm, trial_cfg, optimize=algorithm in OPTIMIZED, upsample_iters=upsample_iters)
    return (case.map_id, algorithm, trial), _record(case, algorithm, seed, sol, timing)


# ----------------------------------------------------------------------
# aggregation

def _stats(values: list[float]) -> dict[str, float | None]:
    if not values:
        return {"median": None, "mean": None, "std": None}
    a = np.asarray(values, dtype=float)
    return {"median": float(np.median(a)), "mean": float(a.mean()), "std": float(a.std())}


@dataclass
class BenchSummary:
    """Per (algorithm, map) aggregates.  Statistics cover successful trials
    only; ``std`` is the population standard deviation."""

    groups: dict[tuple[str, str], dict]

    @classmethod
    def from_records(cls, records: Iterable[TrialRecord]) -> BenchSummary:
        by_group: dict[tuple[str, str], list[TrialRecord]] = {}
        for r in records:
            by_group.setdefault((r.algorithm, r.map_id), []).append(r)
        groups = {}
        for key in sorted(by_group):
            rs = by_group[key]
            ok = [r for r in rs if r.success]
            entry = {
                "trials": len(rs),
                "successes": len(ok),
                "success_rate": len(ok) / len(rs),
            }
            for name in STAT_FIELDS:
                entry[name] = _stats([getattr(r, name) for r in ok if getattr(r, name) is not None])
            groups[key] = entry
        return cls(groups)

    def get(self, algorithm: str, map_id: str) -> dict:
        return self.groups[(algorithm, map_id)]

    def to_json(self) -> str:
        out = [{"algorithm": a, "map_id": m, **entry} for (a, m), entry in self.groups.items()]
        return json.dumps(out, indent=2, sort_keys=True, allow_nan=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> BenchSummary:
        groups = {}
        for item in json.loads(text):
            item = dict(item)
            key = (item.pop("algorithm"), item.pop("map_id"))
            groups[key] = item
        return cls(groups)


def run_benchmark(
    maps: Sequence[MapCase],
    algorithms: Sequence[str],
    trials: int,
    cfg: PlanConfig = PlanConfig(),
    upsample_iters: int = DEFAULT_UPSAMPLE_ITERS,
    timing: bool = True,
    workers: int = 1,
) -> tuple[list[TrialRecord], BenchSummary]:
    """One record per (map, algorithm, trial), in canonical order.

    Per-trial seeds derive from ``cfg.rng_seed``.  Optimized algorithms run
    the full pipeline; the others report the raw path only.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    for a in algorithms:
        if a not in PLANNERS:
            raise ValueError(f"unknown algorithm {a!r}; choose from {', '.join(PLANNERS)}")
    ids = [m.map_id for m in maps]
    if len(set(ids)) != len(ids):
        raise ValueError("map ids must be unique")
    jobs = [(m, a, t, cfg, upsample_iters, timing) for m in maps for a in algorithms for t in range(trials)]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            done = list(pool.map(_run_one, jobs))
    else:
        done = [_run_one(j) for j in jobs]
    records = [rec for _, rec in sorted(done, key=lambda kr: kr[0])]
    return records, BenchSummary.from_records(records)


# ----------------------------------------------------------------------
# record IO

def write_records(records: Iterable[TrialRecord], dest: str | Path | io.TextIOBase) -> None:
    def _write(fh):
        w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in records:
            w.writerow(r.to_row())

    if isinstance(dest, (str, Path)):
        with open(dest, "w", newline="") as fh:
            _write(fh)
    else:
        _write(dest)


def read_records(source: str | Path) -> list[TrialRecord]:
    with open(source, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ValueError(f"{source}: expected columns {','.join(CSV_COLUMNS)}")
        return [TrialRecord.from_row(row) for row in reader]


def records_equal(a: TrialRecord, b: TrialRecord) -> bool:
    """Field-by-field equality, treating NaN as equal to NaN."""
    for name, x in asdict(a).items():
        y = getattr(b, name)
        if isinstance(x, float) and isinstance(y, float) and math.isnan(x) and math.isnan(y):
            continue
        if x != y:
            return False
    return True
