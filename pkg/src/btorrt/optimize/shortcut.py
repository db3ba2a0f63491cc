"""Polyline shortening: greedy down-sampling and randomised up-sampling."""

from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike, NDArray


def cumulative_length(path: ArrayLike) -> NDArray:
    """Arc length at every waypoint, starting at 0."""
    pts = np.asarray(path, dtype=float)
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    return np.concatenate([[0.0], np.cumsum(seg)])


def path_cost(path: ArrayLike) -> float:
    return float(cumulative_length(path)[-1])


def _as_path(path: ArrayLike) -> NDArray:
    pts = np.asarray(path, dtype=float)
    if pts.ndim != 2 or len(pts) < 2:
        raise ValueError("a path needs at least 2 waypoints")
    return pts


def downsample(path: ArrayLike, ws) -> NDArray:
    """Greedy shortcutting over the existing waypoints.

    From the current anchor, keep probing later waypoints while the direct
    segment stays collision-free.  At the first blocked probe the last
    visible waypoint becomes a breakpoint and the new anchor.
    """
    pts = _as_path(path)
    n = len(pts)
    keep = [0]
    anchor = 0
    last_ok = 1
    probe = 2
    while probe < n:
        if ws.segment_free(pts[anchor], pts[probe]):
            last_ok = probe
            probe += 1
        else:
            keep.append(last_ok)
            anchor = last_ok
            last_ok = anchor + 1
            probe = anchor + 2
    if keep[-1] != n - 1:
        keep.append(n - 1)
    return pts[keep].copy()


def upsample(path: ArrayLike, ws, iterations: int, rng: np.random.Generator) -> NDArray:
    """Randomised chord shortcutting between interpolated points.

    Each iteration draws two arc-length positions along the current path,
    interpolates a point at each, and replaces everything between them with
    the direct chord when that chord is collision-free.  Two uniform draws
    are consumed per iteration whether or not it succeeds.
    """
    pts = _as_path(path)
    if iterations < 0:
        raise ValueError("iterations must be >= 0")
    for _ in range(iterations):
        cs = cumulative_length(pts)
        r1, r2 = np.sort(rng.random(2) * cs[-1])
        # segment k holds arc positions cs[k] <= r < cs[k + 1]
        i = int(np.searchsorted(cs, r1, side="right")) - 1
        j = int(np.searchsorted(cs, r2, side="right")) - 1
        if i == j or r1 == r2:
            continue
        a1 = (r1 - cs[i]) / (cs[i + 1] - cs[i])
        a2 = (r2 - cs[j]) / (cs[j + 1] - cs[j])
        g1 = (1.0 - a1) * pts[i] + a1 * pts[i + 1]
        g2 = (1.0 - a2) * pts[j] + a2 * pts[j + 1]
        if ws.segment_free(g1, g2):
            pts = np.concatenate([pts[: i + 1], [g1, g2], pts[j + 1:]])
    return pts
