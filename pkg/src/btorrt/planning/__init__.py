"""Sampling-based planners producing an initial collision-free polyline."""

from .baselines import plan_brrt, plan_rrt, plan_rrt_star
from .bto import plan_bto_rrt
from .core import FreeSpaceError, PlanConfig, PlanResult, Tree, extend, sample_free, steer

PLANNERS = {
    "rrt": plan_rrt,
    "brrt": plan_brrt,
    "rrt_star": plan_rrt_star,
    "bto_rrt": plan_bto_rrt,
}

__all__ = [
    "PLANNERS",
    "FreeSpaceError",
    "PlanConfig",
    "PlanResult",
    "Tree",
    "extend",
    "plan_brrt",
    "plan_bto_rrt",
    "plan_rrt",
    "plan_rrt_star",
    "sample_free",
    "steer",
]
