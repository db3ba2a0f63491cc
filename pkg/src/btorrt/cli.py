"""Command-line entry point: ``btorrt {genmap,plan,analyze,bench,render}``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import bench
from .optimize import DEFAULT_UPSAMPLE_ITERS
from .planning import PLANNERS, FreeSpaceError, PlanConfig
from .render import pipeline_stages, render_svg
from .workspace import (
    ARCHETYPES,
    CloudFormatError,
    CloudMap,
    GridMap,
    analyze_density,
    building_cloud,
    default_endpoints,
    generate_map,
    load_cloud,
    load_grid,
    partitioned_map,
    save_cloud,
    save_grid,
    switchback_map,
    wall_cloud,
)
from .workspace.cloud import DEFAULT_ALPHA, DEFAULT_STEP_COEFF

EXIT_OK, EXIT_NO_PATH, EXIT_USAGE = 0, 1, 2
GRID_EXTRAS = ("empty", "partitioned", "switchback")
CLOUD_KINDS = ("building", "wall")
CLOUD_SUFFIXES = (".ply", ".pcd", ".csv", ".xyz", ".txt")
DEFAULT_STEP = 20.0


class UsageError(Exception):
    """Bad input discovered after argument parsing; exits with code 2."""


# ----------------------------------------------------------------------
# argument helpers

def _point(text: str) -> np.ndarray:
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if len(vals) not in (2, 3):
        raise argparse.ArgumentTypeError(f"expected x,y or x,y,z, got {text!r}")
    return np.array(vals)


def _alpha(text: str) -> float:
    v = float(text)
    if not 0 < v <= 1:
        raise argparse.ArgumentTypeError("alpha must be in (0, 1]")
    return v


def _positive(kind):
    def parse(text: str):
        v = kind(text)
        if v <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return v

    return parse


def _sidecar(path: Path) -> dict:
    side = path.with_suffix(".json")
    if side.is_file():
        return json.loads(side.read_text())
    return {}


def _csv_floats(values) -> str:
    return ",".join(repr(float(v)) for v in values)


def _write_text(text: str, dest: str | None) -> None:
    if dest is None or dest == "-":
        sys.stdout.write(text)
    else:
        Path(dest).write_text(text)


def _load_workspace(args, step: float | None):
    """Returns (workspace, step_size, sidecar metadata)."""
    if args.cloud:
        path = Path(args.cloud)
        cloud = load_cloud(path)
        bounds = None
        if getattr(args, "bounds", None):
            b = [float(v) for v in args.bounds.split(",")]
            if len(b) != 2 * cloud.shape[1]:
                raise UsageError(f"--bounds needs {2 * cloud.shape[1]} numbers")
            bounds = (b[: cloud.shape[1]], b[cloud.shape[1]:])
        if step is None:
            ws, _ = CloudMap.from_density(cloud, alpha=args.alpha, step_coeff=args.step_coeff, bounds=bounds)
        else:
            ws = CloudMap(cloud, step, alpha=args.alpha, bounds=bounds)
        return ws, ws.step_size, _sidecar(path)
    path = Path(args.map)
    ws = load_grid(path, threshold=args.occ_threshold, resolution=args.resolution)
    return ws, step if step is not None else DEFAULT_STEP, _sidecar(path)


def _endpoints(args, meta: dict):
    start = args.start if args.start is not None else meta.get("start")
    goal = args.goal if args.goal is not None else meta.get("goal")
    if start is None or goal is None:
        raise UsageError("give --start and --goal (no sidecar .json with endpoints found)")
    return np.asarray(start, dtype=float), np.asarray(goal, dtype=float)


def _trajectory_csv(points: np.ndarray) -> str:
    header = "x,y,z" if points.shape[1] == 3 else "x,y"
    return header + "\n" + "".join(_csv_floats(p) + "\n" for p in points)


def _read_trajectory(path: Path) -> np.ndarray:
    rows = []
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line[0].isalpha():
            continue
        try:
            rows.append([float(v) for v in line.split(",")])
        except ValueError:
            raise UsageError(f"{path}:{lineno}: not a number row") from None
    if len(rows) < 2 or len({len(r) for r in rows}) != 1:
        raise UsageError(f"{path}: need at least 2 rows of equal width")
    return np.array(rows)


# ----------------------------------------------------------------------
# subcommands

def cmd_genmap(args) -> int:
    out = Path(args.out)
    kind = args.archetype
    if kind in CLOUD_KINDS:
        if out.suffix.lower() not in CLOUD_SUFFIXES:
            raise UsageError(f"cloud output needs one of {', '.join(CLOUD_SUFFIXES)}")
        if kind == "building":
            pts = building_cloud(args.spacing, seed=args.seed)
        else:
            pts = wall_cloud(args.spacing)
        save_cloud(pts, out)
        meta = {"archetype": kind, "seed": args.seed, "spacing": args.spacing, "points": int(len(pts))}
    else:
        if kind == "partitioned":
            grid = partitioned_map(args.size)
            start, goal = default_endpoints("empty", args.size)
        elif kind == "switchback":
            grid, start, goal = switchback_map(args.size)
        else:
            grid = generate_map(kind, args.seed, size=args.size)
            start, goal = default_endpoints(kind, args.size)
        save_grid(grid, out)
        meta = {
            "archetype": kind,
            "seed": args.seed,
            "size": args.size,
            "start": [float(v) for v in start],
            "goal": [float(v) for v in goal],
            "obstacle_fraction": grid.obstacle_fraction,
        }
    out.with_suffix(".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_plan(args) -> int:
    ws, step, meta = _load_workspace(args, args.step)
    start, goal = _endpoints(args, meta)
    cfg = PlanConfig(step_size=step, max_iterations=args.max_iter, rng_seed=args.seed)
    case = bench.MapCase("cli", ws, start, goal)
    optimize = args.algo in bench.OPTIMIZED and not args.no_optimize
    sol = bench.solve(case, args.algo, cfg, optimize=optimize, upsample_iters=args.upsample_iters)
    res = sol.result
    info = {
        "algorithm": args.algo,
        "success": res.success,
        "iterations_used": res.iterations_used,
        "nodes_total": res.nodes_total,
        "step_size": step,
    }
    if not res.success:
        info["reason"] = "no path found within the iteration budget"
        sys.stdout.write(json.dumps(info, indent=2, sort_keys=True) + "\n")
        return EXIT_NO_PATH

    if sol.pipeline is not None:
        info.update(sol.pipeline.summary())
        info["converged"] = sol.pipeline.smooth.converged
        traj = sol.pipeline.trajectory
        stages = pipeline_stages(sol.pipeline)
    else:
        info["raw_cost"] = res.cost
        traj = res.path
        stages = {"raw": res.path}
    _write_text(_trajectory_csv(traj), args.out)
    if args.summary:
        Path(args.summary).write_text(json.dumps(info, indent=2, sort_keys=True) + "\n")
    if args.svg:
        render_svg(ws, res, stages, out=args.svg)
    return EXIT_OK


def cmd_analyze(args) -> int:
    cloud = load_cloud(args.cloud)
    report = analyze_density(cloud, alpha=args.alpha, step_coeff=args.step_coeff)
    sys.stdout.write(report.to_json() + "\n")
    return EXIT_OK


def _bench_maps(args) -> list[bench.MapCase]:
    cases = []
    entries: list[str] = []
    for item in args.maps.split(","):
        p = Path(item)
        if p.is_dir():
            entries += sorted(
                str(f) for f in p.iterdir() if f.suffix.lower() in (".pgm", ".pnm", ".png", ".txt", ".grid", ".asc")
            )
        else:
            entries.append(item)
    for item in entries:
        if item in ARCHETYPES or item == "empty":
            ws = generate_map(item, args.map_seed)
            start, goal = default_endpoints(item)
            cases.append(bench.MapCase(item, ws, start, goal))
            continue
        path = Path(item)
        if not path.is_file():
            raise UsageError(f"map {item!r} is neither a file nor an archetype name")
        try:
            ws = load_grid(path, threshold=args.occ_threshold)
        except (OSError, ValueError) as exc:
            raise UsageError(f"map {item}: {exc}") from exc
        meta = _sidecar(path)
        if "start" not in meta or "goal" not in meta:
            raise UsageError(f"map {item}: sidecar {path.with_suffix('.json')} with start/goal required")
        cases.append(bench.MapCase(path.stem, ws, np.asarray(meta["start"]), np.asarray(meta["goal"])))
    return cases


def cmd_bench(args) -> int:
    algos = [a.strip() for a in args.algos.split(",") if a.strip()]
    for a in algos:
        if a not in PLANNERS:
            raise UsageError(f"unknown algorithm {a!r}; choose from {', '.join(PLANNERS)}")
    cases = _bench_maps(args)
    cfg = PlanConfig(
        step_size=args.step, max_iterations=args.max_iter, rng_seed=args.seed, rrt_star_max_iter=args.rrt_star_iters
    )
    records, summary = bench.run_benchmark(
        cases,
        algos,
        args.trials,
        cfg,
        upsample_iters=args.upsample_iters,
        timing=not args.no_timing,
        workers=args.jobs,
    )
    if args.out in (None, "-"):
        bench.write_records(records, sys.stdout)
    else:
        bench.write_records(records, args.out)
    if args.summary:
        Path(args.summary).write_text(summary.to_json())
    return EXIT_OK


def cmd_render(args) -> int:
    ws, _, meta = _load_workspace(args, None if args.cloud else DEFAULT_STEP)
    stages = {}
    for t in args.traj or []:
        path = Path(t)
        pts = _read_trajectory(path)
        if pts.shape[1] != ws.dim:
            raise UsageError(f"{path}: {pts.shape[1]}-D trajectory on a {ws.dim}-D map")
        name = path.stem
        k = 2
        while name in stages:
            name = f"{path.stem}-{k}"
            k += 1
        stages[name] = pts
    endpoints = [np.asarray(meta[k], dtype=float) for k in ("start", "goal") if k in meta]
    render_svg(ws, None, stages, out=args.out, endpoints=endpoints)
    return EXIT_OK


# ----------------------------------------------------------------------
# parser

def _add_workspace_args(p: argparse.ArgumentParser, cloud_step: bool = True) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--map", help="occupancy grid: PGM/PNG image or ASCII 0/1 grid")
    src.add_argument("--cloud", help="point cloud: ASCII PLY, PCD or x,y,z CSV")
    p.add_argument("--occ-threshold", type=int, default=128, help="intensity below this is an obstacle (default 128)")
    p.add_argument("--resolution", type=_positive(float), default=1.0, help="map units per grid cell")
    p.add_argument("--alpha", type=_alpha, default=DEFAULT_ALPHA, help="safe distance / step size (clouds)")
    p.add_argument("--step-coeff", type=_positive(float), default=DEFAULT_STEP_COEFF, help="step size / mean NN distance (clouds)")
    p.add_argument("--bounds", help="cloud sampling box xmin,ymin[,zmin],xmax,ymax[,zmax]")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="btorrt", description="Sampling-based path planning and benchmarking.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("genmap", help="generate a test map or synthetic cloud")
    p.add_argument("--archetype", required=True, choices=ARCHETYPES + GRID_EXTRAS + CLOUD_KINDS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--size", type=int, default=500)
    p.add_argument("--spacing", type=_positive(float), default=0.2, help="lattice pitch of synthetic clouds")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_genmap)

    p = sub.add_parser("plan", help="plan (and optimize) one path")
    _add_workspace_args(p)
    p.add_argument("--start", type=_point)
    p.add_argument("--goal", type=_point)
    p.add_argument("--algo", choices=tuple(PLANNERS), default="bto_rrt")
    p.add_argument("--step", type=_positive(float), help="step size (default 20 on grids, from density on clouds)")
    p.add_argument("--max-iter", type=_positive(int), default=5000)
    p.add_argument("--upsample-iters", type=int, default=DEFAULT_UPSAMPLE_ITERS)
    p.add_argument("--no-optimize", action="store_true", help="output the raw planner path")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="trajectory CSV (default: standard output)")
    p.add_argument("--summary", help="write a JSON summary here")
    p.add_argument("--svg", help="write an SVG picture here")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("analyze", help="point-cloud density analysis")
    p.add_argument("--cloud", required=True)
    p.add_argument("--alpha", type=_alpha, default=DEFAULT_ALPHA)
    p.add_argument("--step-coeff", type=_positive(float), default=DEFAULT_STEP_COEFF)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("bench", help="run seeded trials and aggregate statistics")
    p.add_argument("--maps", required=True, help="directory, comma list of map files, or archetype names")
    p.add_argument("--map-seed", type=int, default=1, help="seed for maps generated from archetype names")
    p.add_argument("--algos", default=",".join(PLANNERS))
    p.add_argument("--trials", type=_positive(int), default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--step", type=_positive(float), default=DEFAULT_STEP)
    p.add_argument("--max-iter", type=_positive(int), default=5000)
    p.add_argument("--rrt-star-iters", type=_positive(int), default=4000)
    p.add_argument("--upsample-iters", type=int, default=DEFAULT_UPSAMPLE_ITERS)
    p.add_argument("--occ-threshold", type=int, default=128)
    p.add_argument("--no-timing", action="store_true", help="leave wall_time_ms empty for byte-stable output")
    p.add_argument("--jobs", type=_positive(int), default=1, help="worker processes")
    p.add_argument("--out", help="records CSV (default: standard output)")
    p.add_argument("--summary", help="write the per-group JSON summary here")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("render", help="draw a map with trajectories as SVG")
    _add_workspace_args(p)
    p.add_argument("--traj", nargs="*", help="trajectory CSV files")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_render)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse: 2 on usage errors, 0 for --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (UsageError, CloudFormatError, FreeSpaceError, OSError, ValueError) as exc:
        print(f"btorrt {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
