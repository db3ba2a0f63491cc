"""Bidirectional target-oriented RRT."""

from __future__ import annotations

import time

import numpy as np

from .core import PlanConfig, PlanResult, Tree, check_endpoints, extend, join_branches


def plan_bto_rrt(ws, start, goal, cfg: PlanConfig = PlanConfig()) -> PlanResult:
    """Grow one tree from the start toward the goal and a second from the
    goal toward whichever node the first tree added last.

    The trees are joined once the goal-side extension lands within one step
    of the start tree's newest node over a collision-free edge.  Tree roles
    stay fixed for the whole run.
    """
    t0 = time.perf_counter()
    start, goal = check_endpoints(ws, start, goal)
    rng = np.random.default_rng(cfg.rng_seed)
    tree_a, tree_b = Tree(start), Tree(goal)
    step = cfg.step_size

    path = None
    it = 0
    while it < cfg.max_iterations:
        it += 1
        extend(tree_a, goal, ws, step, rng)
        anchor = tree_a.newest_point
        reached = extend(tree_b, anchor, ws, step, rng)
        if reached and ws.segment_free(tree_b.newest_point, anchor):
            path = join_branches(tree_a, tree_a.newest, tree_b, tree_b.newest)
            break

    return PlanResult("bto_rrt", path, tree_a, tree_b, it, time.perf_counter() - t0)
