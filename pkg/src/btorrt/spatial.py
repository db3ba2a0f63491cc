"""Static k-d tree with exact nearest-neighbour and fixed-radius queries.

Queries are evaluated in batches: every query descends the tree level by
level together, so one call costs a fixed number of vectorised numpy passes
instead of a Python loop per point.  Results are exact and identical to an
exhaustive scan, with ties at equal distance resolved to the lowest stored
index.  Distances are ``sqrt(dx*dx + dy*dy [+ dz*dz])`` summed in that
order.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike, NDArray

_NO_CHILD = -1


def sq_norm(v: NDArray) -> NDArray:
    """Squared length over the last axis, summed x, y, z left to right so
    every caller rounds identically."""
    out = v[..., 0] * v[..., 0]
    for k in range(1, v.shape[-1]):
        out = out + v[..., k] * v[..., k]
    return out


class KdTree:
    """Immutable k-d tree over a fixed point set.

    Parameters
    ----------
    points : (n, d) array-like, d in {2, 3}
    leaf_size : maximum number of points stored in one leaf.
    """

    def __init__(self, points: ArrayLike, leaf_size: int = 16):
        pts = np.asarray(points, dtype=float)
        if pts.size == 0:
            raise ValueError("empty point set")
        if pts.ndim != 2:
            raise ValueError("dimension mismatch")
        if pts.shape[1] not in (2, 3):
            raise ValueError(f"dimension mismatch: expected 2 or 3 coordinates, got {pts.shape[1]}")
        if leaf_size < 1:
            raise ValueError("leaf_size must be >= 1")

        self.points = pts.copy()
        self.points.setflags(write=False)
        self.dim = pts.shape[1]
        self.leaf_size = leaf_size
        self._build()

    @classmethod
    def build(cls, points, leaf_size: int = 16) -> KdTree:
        """Build from a sequence of points, rejecting ragged input."""
        if not isinstance(points, np.ndarray):
            points = list(points)
            if not points:
                raise ValueError("empty point set")
            if len({len(p) for p in points}) != 1:
                raise ValueError("dimension mismatch")
        return cls(points, leaf_size=leaf_size)

    def __len__(self) -> int:
        return len(self.points)

    # ------------------------------------------------------------------
    # construction

    def _build(self) -> None:
        n = len(self.points)
        perm = np.arange(n)
        axis, split, left, right, lo, hi, start, stop = ([] for _ in range(8))

        def new_node(idx: NDArray, depth: int, offset: int) -> int:
            node = len(axis)
            sub = self.points[idx]
            axis.append(depth % self.dim)
            split.append(0.0)
            left.append(_NO_CHILD)
            right.append(_NO_CHILD)
            lo.append(sub.min(axis=0))
            hi.append(sub.max(axis=0))
            start.append(offset)
            stop.append(offset + len(idx))
            if len(idx) <= self.leaf_size:
                perm[offset:offset + len(idx)] = idx
                return node
            ax = depth % self.dim
            m = len(idx) // 2
            order = np.argpartition(sub[:, ax], m)
            idx = idx[order]
            split[node] = float(self.points[idx[m], ax])
            left[node] = new_node(idx[:m], depth + 1, offset)
            right[node] = new_node(idx[m:], depth + 1, offset + m)
            return node

        new_node(perm.copy(), 0, 0)

        self._axis = np.array(axis, dtype=np.intp)
        self._split = np.array(split)
        self._left = np.array(left, dtype=np.intp)
        self._right = np.array(right, dtype=np.intp)
        self._lo = np.array(lo)
        self._hi = np.array(hi)
        self._is_leaf = self._left == _NO_CHILD
        self.perm = perm

        # padded per-leaf point blocks: leaf slot -> (leaf_size,) indices
        leaves = np.flatnonzero(self._is_leaf)
        self._leaf_slot = np.full(len(axis), -1, dtype=np.intp)
        self._leaf_slot[leaves] = np.arange(len(leaves))
        block = np.full((len(leaves), self.leaf_size), n, dtype=np.intp)
        for k, node in enumerate(leaves):
            s, e = start[node], stop[node]
            block[k, : e - s] = perm[s:e]
        self._leaf_idx = block
        padded = np.vstack([self.points, np.full((1, self.dim), np.inf)])
        self._leaf_pts = padded[block]

    # ------------------------------------------------------------------
    # helpers

    def _check_queries(self, q: ArrayLike) -> tuple[NDArray, bool]:
        arr = np.asarray(q, dtype=float)
        single = arr.ndim == 1
        arr = np.atleast_2d(arr)
        if arr.ndim != 2 or arr.shape[1] != self.dim:
            raise ValueError(f"dimension mismatch: tree is {self.dim}-D")
        return arr, single

    def _box_d2(self, q: NDArray, nodes: NDArray) -> NDArray:
        gap = np.maximum(self._lo[nodes] - q, 0.0) + np.maximum(q - self._hi[nodes], 0.0)
        return sq_norm(gap)

    def _leaf_d2(self, q: NDArray, nodes: NDArray) -> tuple[NDArray, NDArray]:
        slot = self._leaf_slot[nodes]
        diff = self._leaf_pts[slot] - q[:, None, :]
        return sq_norm(diff), self._leaf_idx[slot]

    # ------------------------------------------------------------------
    # nearest neighbour

    def nearest_many(self, queries: ArrayLike, exclude: ArrayLike | None = None) -> tuple[NDArray, NDArray]:
        """Nearest stored point for each query row.

        ``exclude`` optionally gives, per query, one stored index that must
        not be returned (used for nearest-other-point lookups).  Returns
        ``(indices, distances)``.
        """
        Q, _ = self._check_queries(queries)
        m = len(Q)
        n = len(self.points)
        skip = np.full(m, -1, dtype=np.intp) if exclude is None else np.asarray(exclude, dtype=np.intp)
        best_d2 = np.full(m, np.inf)
        best_idx = np.full(m, n, dtype=np.intp)

        def absorb(qi: NDArray, nodes: NDArray) -> None:
            d2, idx = self._leaf_d2(Q[qi], nodes)
            d2 = np.where(idx == skip[qi, None], np.inf, d2)
            row_min = d2.min(axis=1)
            cand = np.where(d2 == row_min[:, None], idx, n).min(axis=1)
            cand[np.isinf(row_min)] = n
            # lexicographic (d2, idx) reduction per query
            order = np.lexsort((cand, row_min, qi))
            qi_s, d_s, c_s = qi[order], row_min[order], cand[order]
            first = np.ones(len(qi_s), dtype=bool)
            first[1:] = qi_s[1:] != qi_s[:-1]
            qi_s, d_s, c_s = qi_s[first], d_s[first], c_s[first]
            better = (d_s < best_d2[qi_s]) | ((d_s == best_d2[qi_s]) & (c_s < best_idx[qi_s]))
            best_d2[qi_s[better]] = d_s[better]
            best_idx[qi_s[better]] = c_s[better]

        # greedy descent for an initial bound
        node = np.zeros(m, dtype=np.intp)
        qi_all = np.arange(m)
        while True:
            inner = ~self._is_leaf[node]
            if not inner.any():
                break
            nd = node[inner]
            go_left = Q[qi_all[inner], self._axis[nd]] < self._split[nd]
            node[inner] = np.where(go_left, self._left[nd], self._right[nd])
        absorb(qi_all, node)

        # exact pass: visit every node whose box is not farther than the bound
        qi = qi_all
        nodes = np.zeros(m, dtype=np.intp)
        while len(qi):
            keep = self._box_d2(Q[qi], nodes) <= best_d2[qi]
            qi, nodes = qi[keep], nodes[keep]
            leaf = self._is_leaf[nodes]
            if leaf.any():
                absorb(qi[leaf], nodes[leaf])
            qi, nodes = qi[~leaf], nodes[~leaf]
            qi = np.concatenate([qi, qi])
            nodes = np.concatenate([self._left[nodes], self._right[nodes]])

        if np.any(best_idx == n):
            raise ValueError("no admissible neighbour")
        return best_idx, np.sqrt(best_d2)

    def nearest(self, q: ArrayLike) -> tuple[int, float]:
        """Index and distance of the stored point closest to ``q``."""
        Q, single = self._check_queries(q)
        if not single:
            raise ValueError("dimension mismatch: expected a single point")
        idx, dist = self.nearest_many(Q)
        return int(idx[0]), float(dist[0])

    # ------------------------------------------------------------------
    # fixed radius

    def _radius_pairs(self, Q: NDArray, r: NDArray, stop_on_hit: bool):
        """Yield (query rows, hit indices) blocks for points within ``r``."""
        m = len(Q)
        # prune on a slightly widened r^2; the final test is on the distance
        # itself so it agrees exactly with an exhaustive |p - q| <= r scan
        r2 = r * r * (1.0 + 1e-12)
        hit = np.zeros(m, dtype=bool)
        qi = np.arange(m)
        nodes = np.zeros(m, dtype=np.intp)
        while len(qi):
            keep = self._box_d2(Q[qi], nodes) <= r2[qi]
            if stop_on_hit:
                keep &= ~hit[qi]
            qi, nodes = qi[keep], nodes[keep]
            leaf = self._is_leaf[nodes]
            if leaf.any():
                lq, ln = qi[leaf], nodes[leaf]
                d2, idx = self._leaf_d2(Q[lq], ln)
                inside = np.sqrt(d2) <= r[lq, None]
                rows, cols = np.nonzero(inside)
                if len(rows):
                    hit[lq[rows]] = True
                    yield lq[rows], idx[rows, cols]
            qi, nodes = qi[~leaf], nodes[~leaf]
            qi = np.concatenate([qi, qi])
            nodes = np.concatenate([self._left[nodes], self._right[nodes]])

    def any_within(self, queries: ArrayLike, r: float | ArrayLike) -> NDArray[np.bool_]:
        """Per query, whether some stored point lies at distance <= r."""
        Q, _ = self._check_queries(queries)
        radius = np.broadcast_to(np.asarray(r, dtype=float), (len(Q),))
        if np.any(radius < 0):
            raise ValueError("negative radius")
        out = np.zeros(len(Q), dtype=bool)
        for rows, _ in self._radius_pairs(Q, radius, stop_on_hit=True):
            out[rows] = True
        return out

    def within_radius_many(self, queries: ArrayLike, r: float) -> list[NDArray]:
        """Sorted index arrays of stored points within ``r`` of each query."""
        Q, _ = self._check_queries(queries)
        if r < 0:
            raise ValueError("negative radius")
        rows_all, idx_all = [], []
        for rows, idx in self._radius_pairs(Q, np.full(len(Q), float(r)), stop_on_hit=False):
            rows_all.append(rows)
            idx_all.append(idx)
        if not rows_all:
            return [np.empty(0, dtype=np.intp) for _ in range(len(Q))]
        rows = np.concatenate(rows_all)
        idx = np.concatenate(idx_all)
        order = np.lexsort((idx, rows))
        rows, idx = rows[order], idx[order]
        bounds = np.searchsorted(rows, np.arange(len(Q) + 1))
        return [idx[bounds[k]:bounds[k + 1]] for k in range(len(Q))]

    def within_radius(self, q: ArrayLike, r: float) -> list[int]:
        """Indices of stored points p with |p - q| <= r, ascending."""
        Q, single = self._check_queries(q)
        if not single:
            raise ValueError("dimension mismatch: expected a single point")
        return self.within_radius_many(Q, r)[0].tolist()
