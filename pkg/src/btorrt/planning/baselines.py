"""Reference planners used for comparison: RRT, bidirectional RRT and RRT*."""

from __future__ import annotations

import time
from collections import deque

import numpy as np

from .core import PlanConfig, PlanResult, Tree, check_endpoints, extend, join_branches, sample_free, steer


def plan_rrt(ws, start, goal, cfg: PlanConfig = PlanConfig()) -> PlanResult:
    """Single-tree RRT with uniform sampling and no goal bias."""
    t0 = time.perf_counter()
    start, goal = check_endpoints(ws, start, goal)
    rng = np.random.default_rng(cfg.rng_seed)
    tree = Tree(start)
    step = cfg.step_size

    path = None
    it = 0
    while it < cfg.max_iterations:
        it += 1
        x_rand = sample_free(ws, rng)
        near = tree.nearest(x_rand)
        x_new = steer(tree.nodes[near], x_rand, step)
        if not ws.segment_free(tree.nodes[near], x_new):
            continue
        new = tree.add(x_new, near)
        if np.linalg.norm(x_new - goal) < step and ws.segment_free(x_new, goal):
            tree.add(goal, new)
            path = tree.branch(tree.newest)[::-1]
            break

    return PlanResult("rrt", path, tree, None, it, time.perf_counter() - t0)


def _try_connect(ws, tree: Tree, node: int, other: Tree, step: float):
    j = other.nearest(tree.nodes[node])
    q = other.nodes[j]
    if np.linalg.norm(q - tree.nodes[node]) < step and ws.segment_free(tree.nodes[node], q):
        return j
    return None


def plan_brrt(ws, start, goal, cfg: PlanConfig = PlanConfig()) -> PlanResult:
    """Two trees, each extending toward the other tree's root.

    After every round the newest node of each tree is tested for a one-step
    collision-free link to the closest node of the opposite tree.
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
        extend(tree_b, start, ws, step, rng)
        j = _try_connect(ws, tree_a, tree_a.newest, tree_b, step)
        if j is not None:
            path = join_branches(tree_a, tree_a.newest, tree_b, j)
            break
        j = _try_connect(ws, tree_b, tree_b.newest, tree_a, step)
        if j is not None:
            path = join_branches(tree_a, j, tree_b, tree_b.newest)
            break

    return PlanResult("brrt", path, tree_a, tree_b, it, time.perf_counter() - t0)


class _StarTree(Tree):
    """Tree with path costs and child lists, as rewiring needs."""

    def __init__(self, root, capacity: int = 4096):
        super().__init__(root, capacity)
        self._cost = np.zeros(capacity)
        self.children: list[list[int]] = [[]]

    @property
    def cost(self):
        return self._cost[: self.size]

    def add(self, point, parent: int, cost: float = 0.0) -> int:
        if self.size == len(self._cost):
            self._cost = np.concatenate([self._cost, np.empty_like(self._cost)])
        idx = super().add(point, parent)
        self._cost[idx] = cost
        self.children.append([])
        if parent >= 0:
            self.children[parent].append(idx)
        return idx

    def reparent(self, idx: int, parent: int, cost: float) -> None:
        old = int(self._parent[idx])
        self.children[old].remove(idx)
        self.children[parent].append(idx)
        self.set_parent(idx, parent)
        delta = cost - self._cost[idx]
        queue = deque([idx])
        while queue:
            k = queue.popleft()
            self._cost[k] += delta
            queue.extend(self.children[k])


def plan_rrt_star(ws, start, goal, cfg: PlanConfig = PlanConfig()) -> PlanResult:
    """RRT* with a fixed rewiring radius, run for exactly
    ``cfg.rrt_star_max_iter`` iterations.

    The returned path is the cheapest collision-free connection from any
    node within the rewiring radius of the goal.
    """
    t0 = time.perf_counter()
    start, goal = check_endpoints(ws, start, goal)
    rng = np.random.default_rng(cfg.rng_seed)
    tree = _StarTree(start)
    step = cfg.step_size
    r2 = cfg.star_radius**2

    for _ in range(cfg.rrt_star_max_iter):
        x_rand = sample_free(ws, rng)
        nearest = int(np.argmin(tree.sq_dists(x_rand)))
        x_new = steer(tree.nodes[nearest], x_rand, step)
        d2 = tree.sq_dists(x_new)
        near = np.flatnonzero(d2 <= r2)
        if len(near) == 0 or d2[near].min() == 0.0:
            continue
        dist = np.sqrt(d2[near])
        through = tree.cost[near] + dist
        # cheapest collision-free parent, checked lazily in cost order
        # (stable sort: equal costs keep the lower index)
        best = -1
        for k in np.argsort(through, kind="stable"):
            if ws.segment_free(tree.nodes[near[k]], x_new):
                best = int(k)
                break
        if best < 0:
            continue
        new_cost = float(through[best])
        new = tree.add(x_new, int(near[best]), new_cost)
        # rewire neighbours that become cheaper through the new node
        for k, dk in zip(near, dist):
            alt = new_cost + dk
            if alt < tree.cost[k] and ws.segment_free(tree.nodes[k], x_new):
                tree.reparent(int(k), new, alt)

    path = None
    d2 = tree.sq_dists(goal)
    near = np.flatnonzero(d2 <= r2)
    if len(near):
        free = ws.segments_free(tree.nodes[near], np.broadcast_to(goal, (len(near), ws.dim)))
        near = near[free]
    if len(near):
        total = tree.cost[near] + np.sqrt(d2[near])
        best = int(near[np.argmin(total)])
        tree.add(goal, best, float(total.min()))
        path = tree.branch(tree.newest)[::-1]

    return PlanResult("rrt_star", path, tree, None, cfg.rrt_star_max_iter, time.perf_counter() - t0)
