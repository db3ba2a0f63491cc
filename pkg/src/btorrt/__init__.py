"""Bidirectional target-oriented RRT with path optimization, point-cloud
planning and a benchmark harness."""

from .optimize import PipelineResult, downsample, fit_cubic_spline, kp_smooth, optimize_path, upsample
from .planning import PLANNERS, PlanConfig, PlanResult, plan_brrt, plan_bto_rrt, plan_rrt, plan_rrt_star
from .spatial import KdTree
from .workspace import CloudMap, GridMap, analyze_density, generate_map, load_cloud, load_grid

__version__ = "0.1.0"

__all__ = [
    "PLANNERS",
    "CloudMap",
    "GridMap",
    "KdTree",
    "PipelineResult",
    "PlanConfig",
    "PlanResult",
    "analyze_density",
    "downsample",
    "fit_cubic_spline",
    "generate_map",
    "kp_smooth",
    "load_cloud",
    "load_grid",
    "optimize_path",
    "plan_brrt",
    "plan_bto_rrt",
    "plan_rrt",
    "plan_rrt_star",
    "upsample",
]
