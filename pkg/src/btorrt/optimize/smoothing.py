"""Collision-aware spline smoothing by key-point insertion."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .spline import SplinePath, discretize, fit_cubic_spline

DEFAULT_MAX_ROUNDS = 50
MIN_KNOT_GAP = 1e-9


@dataclass
class SmoothResult:
    spline: SplinePath
    points: NDArray
    keypoints: NDArray
    rounds: int
    inserted: int
    converged: bool

    @property
    def length(self) -> float:
        return float(np.linalg.norm(np.diff(self.points, axis=0), axis=1).sum())


def drop_repeats(points: ArrayLike, tol: float = MIN_KNOT_GAP) -> NDArray:
    """Remove waypoints closer than ``tol`` to the previously kept one.

    Both endpoints are always kept exactly.
    """
    pts = np.asarray(points, dtype=float)
    keep = [0]
    for i in range(1, len(pts)):
        if np.linalg.norm(pts[i] - pts[keep[-1]]) > tol:
            keep.append(i)
    if keep[-1] != len(pts) - 1:
        if len(keep) > 1:
            keep[-1] = len(pts) - 1
        else:
            keep.append(len(pts) - 1)
    return pts[keep]


def kp_smooth(
    keypoints: ArrayLike,
    ws,
    sample_spacing: float,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
    rule: str = "bracket",
) -> SmoothResult:
    """Fit a natural spline through the key points and densify until the
    sampled curve is collision-free.

    The curve is sampled at ``sample_spacing`` and consecutive samples are
    joined by straight segments for checking.  At the first hit a key point
    is inserted and the spline refitted:

    ``"bracket"``
        midpoint of the two key points whose knot interval holds the hit.
    ``"nearest"``
        midpoint of the key point nearest the hit (by curve parameter,
        earlier on ties) and its predecessor.  Stalls when the hit lies
        just after its nearest key point.

    If ``max_rounds`` insertions do not clear every hit, the input polyline
    is returned as the trajectory with ``converged=False``.
    """
    if sample_spacing <= 0:
        raise ValueError("sample_spacing must be positive")
    if rule not in ("bracket", "nearest"):
        raise ValueError(f"unknown insertion rule {rule!r}")
    original = drop_repeats(keypoints)
    kp = original
    rounds = 0
    while True:
        spline = fit_cubic_spline(kp)
        params, pts = discretize(spline, sample_spacing)
        free = ws.segments_free(pts[:-1], pts[1:])
        if free.all():
            return SmoothResult(spline, pts, kp, rounds, len(kp) - len(original), True)
        k = int(np.argmin(free))
        hit = 0.5 * (params[k] + params[k + 1])
        if rule == "bracket":
            j = int(spline.segment_of(hit)) + 1
        else:
            j = max(int(np.argmin(np.abs(spline.knots - hit))), 1)
        if rounds == max_rounds or spline.knots[j] - spline.knots[j - 1] <= 2 * MIN_KNOT_GAP:
            return SmoothResult(spline, original.copy(), kp, rounds, len(kp) - len(original), False)
        mid = 0.5 * (kp[j - 1] + kp[j])
        kp = np.insert(kp, j, mid, axis=0)
        rounds += 1
