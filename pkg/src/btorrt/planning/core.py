"""Search trees, planner configuration and the shared extension step."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

ROOT = -1
MAX_SAMPLE_ATTEMPTS = 10_000
_SAMPLE_BATCH = 32


class FreeSpaceError(RuntimeError):
    """Rejection sampling could not find a collision-free point."""


class Tree:
    """Growable rooted tree of positions with parent links.

    Nearest-node lookups are a vectorised scan over the stored positions,
    ties going to the lowest node index.
    """

    def __init__(self, root: ArrayLike, capacity: int = 256):
        root = np.asarray(root, dtype=float)
        self.dim = root.shape[0]
        self._nodes = np.empty((capacity, self.dim))
        self._parent = np.empty(capacity, dtype=np.intp)
        self._nodes[0] = root
        self._parent[0] = ROOT
        self.size = 1
        self.newest = 0

    def __len__(self) -> int:
        return self.size

    @property
    def nodes(self) -> NDArray:
        return self._nodes[: self.size]

    @property
    def parent(self) -> NDArray:
        return self._parent[: self.size]

    @property
    def root(self) -> NDArray:
        return self._nodes[0]

    @property
    def newest_point(self) -> NDArray:
        return self._nodes[self.newest]

    def add(self, point: ArrayLike, parent: int) -> int:
        if self.size == len(self._nodes):
            self._nodes = np.concatenate([self._nodes, np.empty_like(self._nodes)])
            self._parent = np.concatenate([self._parent, np.empty_like(self._parent)])
        idx = self.size
        self._nodes[idx] = point
        self._parent[idx] = parent
        self.size += 1
        self.newest = idx
        return idx

    def set_parent(self, idx: int, parent: int) -> None:
        self._parent[idx] = parent

    def sq_dists(self, q: ArrayLike) -> NDArray:
        diff = self.nodes - np.asarray(q, dtype=float)
        return np.einsum("ij,ij->i", diff, diff)

    def nearest(self, q: ArrayLike) -> int:
        return int(np.argmin(self.sq_dists(q)))

    def branch(self, idx: int) -> NDArray:
        """Positions from node ``idx`` back to the root, inclusive."""
        chain = []
        while idx != ROOT:
            chain.append(idx)
            idx = int(self._parent[idx])
        return self._nodes[chain].copy()

    def edges(self) -> tuple[NDArray, NDArray]:
        """(child positions, parent positions) for every non-root node."""
        kids = np.arange(1, self.size)
        return self.nodes[kids], self.nodes[self.parent[kids]]


@dataclass(frozen=True)
class PlanConfig:
    step_size: float = 20.0
    max_iterations: int = 5000
    rng_seed: int = 0
    rrt_star_radius: float | None = None
    rrt_star_max_iter: int = 4000

    def __post_init__(self):
        if self.step_size <= 0:
            raise ValueError("step_size must be positive")
        if self.max_iterations <= 0 or self.rrt_star_max_iter <= 0:
            raise ValueError("iteration limits must be positive")
        if self.rrt_star_radius is not None and self.rrt_star_radius < self.step_size:
            raise ValueError("rrt_star_radius must be at least step_size")

    @property
    def star_radius(self) -> float:
        return self.rrt_star_radius if self.rrt_star_radius is not None else 3.0 * self.step_size


@dataclass
class PlanResult:
    algorithm: str
    path: NDArray | None
    tree_a: Tree
    tree_b: Tree | None
    iterations_used: int
    wall_time: float = 0.0
    extras: dict = field(default_factory=dict)

    @property
    def success(self) -> bool:
        return self.path is not None

    @property
    def nodes_total(self) -> int:
        return len(self.tree_a) + (len(self.tree_b) if self.tree_b is not None else 0)

    @property
    def cost(self) -> float | None:
        if self.path is None:
            return None
        return float(np.linalg.norm(np.diff(self.path, axis=0), axis=1).sum())


def sample_free(ws, rng: np.random.Generator) -> NDArray:
    """Uniform sample over the workspace box, rejecting colliding points."""
    drawn = 0
    while drawn < MAX_SAMPLE_ATTEMPTS:
        batch = ws.sample(rng, _SAMPLE_BATCH)
        drawn += _SAMPLE_BATCH
        ok = np.flatnonzero(ws.points_free(batch))
        if len(ok):
            return batch[ok[0]]
    raise FreeSpaceError("free space not sampleable")


def steer(origin: NDArray, toward: NDArray, step: float) -> NDArray:
    delta = toward - origin
    dist = float(np.sqrt(delta @ delta))
    if dist <= step:
        return toward.copy()
    return origin + delta * (step / dist)


def extend(tree: Tree, target: ArrayLike, ws, step: float, rng: np.random.Generator) -> bool:
    """Grow ``tree`` by one node, aiming straight at ``target`` when visible.

    If the segment from the tree node nearest the target is collision-free
    the target itself is the steering goal; otherwise a uniform free-space
    sample is, grown from the node nearest that sample.  Returns True when
    the new node ends up within one step of the target.
    """
    target = np.asarray(target, dtype=float)
    near = tree.nearest(target)
    x_near = tree.nodes[near]
    if ws.segment_free(x_near, target):
        x_rand = target
    else:
        x_rand = sample_free(ws, rng)
        near = tree.nearest(x_rand)
        x_near = tree.nodes[near]
    x_new = steer(x_near, x_rand, step)
    if np.array_equal(x_new, x_near):
        return bool(np.linalg.norm(x_near - target) < step)
    if not ws.segment_free(x_near, x_new):
        return False
    tree.add(x_new, near)
    return bool(np.linalg.norm(x_new - target) < step)


def check_endpoints(ws, start: ArrayLike, goal: ArrayLike) -> tuple[NDArray, NDArray]:
    s = np.asarray(start, dtype=float)
    g = np.asarray(goal, dtype=float)
    if s.shape != (ws.dim,) or g.shape != (ws.dim,):
        raise ValueError(f"dimension mismatch: workspace is {ws.dim}-D")
    if np.array_equal(s, g):
        raise ValueError("start and goal coincide")
    if not ws.point_free(s):
        raise ValueError(f"start {s.tolist()} is in collision")
    if not ws.point_free(g):
        raise ValueError(f"goal {g.tolist()} is in collision")
    return s, g


def join_branches(tree_a: Tree, ia: int, tree_b: Tree, ib: int) -> NDArray:
    """Root of ``tree_a`` -> node ia, then node ib -> root of ``tree_b``."""
    head = tree_a.branch(ia)[::-1]
    tail = tree_b.branch(ib)
    if np.array_equal(head[-1], tail[0]):
        tail = tail[1:]
    return np.concatenate([head, tail])
