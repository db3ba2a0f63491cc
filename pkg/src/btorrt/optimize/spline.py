"""Natural cubic splines through waypoints, parameterised by chord length."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray


def solve_tridiagonal(sub: NDArray, diag: NDArray, sup: NDArray, rhs: NDArray) -> NDArray:
    """Thomas algorithm for ``sub[i] x[i-1] + diag[i] x[i] + sup[i] x[i+1] = rhs[i]``.

    ``rhs`` may carry trailing columns, solved together.  ``sub[0]`` and
    ``sup[-1]`` are ignored.  The matrix must be diagonally dominant.
    """
    n = len(diag)
    c = np.zeros(n)
    d = np.array(rhs, dtype=float)
    b = np.array(diag, dtype=float)
    c[0] = sup[0] / b[0] if n > 1 else 0.0
    d[0] = d[0] / b[0]
    for i in range(1, n):
        denom = b[i] - sub[i] * c[i - 1]
        if i < n - 1:
            c[i] = sup[i] / denom
        d[i] = (d[i] - sub[i] * d[i - 1]) / denom
    for i in range(n - 2, -1, -1):
        d[i] = d[i] - c[i] * d[i + 1]
    return d


@dataclass(frozen=True)
class SplinePath:
    """Piecewise cubic ``S_j(t) = a_j + b_j u + c_j u^2 + d_j u^3`` with
    ``u = t - knots[j]``; coefficient arrays are ``(segments, dim)``."""

    knots: NDArray
    keypoints: NDArray
    b: NDArray
    c: NDArray
    d: NDArray

    @property
    def a(self) -> NDArray:
        return self.keypoints[:-1]

    @property
    def h(self) -> NDArray:
        return np.diff(self.knots)[:, None]

    @property
    def length_param(self) -> float:
        return float(self.knots[-1])

    def segment_of(self, t: ArrayLike) -> NDArray:
        t = np.asarray(t, dtype=float)
        j = np.searchsorted(self.knots, t, side="right") - 1
        return np.clip(j, 0, len(self.a) - 1)

    def evaluate(self, t: ArrayLike, derivative: int = 0, segment: ArrayLike | None = None) -> NDArray:
        """Value (or 1st/2nd/3rd derivative) at parameters ``t``.

        ``segment`` forces which polynomial piece to use, which lets callers
        take one-sided limits exactly at a knot.
        """
        t = np.atleast_1d(np.asarray(t, dtype=float))
        j = self.segment_of(t) if segment is None else np.broadcast_to(np.asarray(segment), t.shape)
        u = (t - self.knots[j])[:, None]
        a, b, c, d = self.a[j], self.b[j], self.c[j], self.d[j]
        if derivative == 0:
            return a + u * (b + u * (c + u * d))
        if derivative == 1:
            return b + u * (2.0 * c + 3.0 * u * d)
        if derivative == 2:
            return 2.0 * c + 6.0 * u * d
        if derivative == 3:
            return 6.0 * d
        raise ValueError("derivative order must be 0..3")


def chord_parameters(points: NDArray) -> NDArray:
    seg = np.linalg.norm(np.diff(points, axis=0), axis=1)
    return np.concatenate([[0.0], np.cumsum(seg)])


def fit_cubic_spline(keypoints: ArrayLike) -> SplinePath:
    """Natural cubic spline through ``keypoints``, one cubic per coordinate
    against a shared chord-length parameter."""
    pts = np.asarray(keypoints, dtype=float)
    if pts.ndim != 2 or len(pts) < 2:
        raise ValueError("need at least 2 keypoints")
    t = chord_parameters(pts)
    h = np.diff(t)
    if np.any(h <= 0.0):
        raise ValueError("degenerate knot: consecutive keypoints coincide")
    n = len(pts)
    a = pts
    c = np.zeros_like(pts)
    if n > 2:
        hh = h[:, None]
        slope = (a[1:] - a[:-1]) / hh
        rhs = 3.0 * (slope[1:] - slope[:-1])
        c[1:-1] = solve_tridiagonal(
            sub=h[:-1],
            diag=2.0 * (h[:-1] + h[1:]),
            sup=h[1:],
            rhs=rhs,
        )
    hh = h[:, None]
    b = (a[1:] - a[:-1]) / hh - hh * (2.0 * c[:-1] + c[1:]) / 3.0
    d = (c[1:] - c[:-1]) / (3.0 * hh)
    return SplinePath(knots=t, keypoints=pts.copy(), b=b, c=c[:-1].copy(), d=d)


def discretize(spline: SplinePath, spacing: float) -> tuple[NDArray, NDArray]:
    """Sample the spline so consecutive samples are at most ``spacing`` apart.

    Every knot is included, so keypoints (and both endpoints) appear
    exactly.  Returns ``(params, points)``.
    """
    if spacing <= 0:
        raise ValueError("spacing must be positive")
    knots = spline.knots
    counts = np.maximum(np.ceil(np.diff(knots) / spacing).astype(np.intp), 1)
    while True:
        params = [knots[:1]]
        for j, m in enumerate(counts):
            params.append(knots[j] + (knots[j + 1] - knots[j]) * np.arange(1, m + 1) / m)
        params = np.concatenate(params)
        seg = np.concatenate([[0], np.repeat(np.arange(len(counts)), counts)])
        pts = spline.evaluate(params, segment=seg)
        pts[np.concatenate([[0], np.cumsum(counts)])] = spline.keypoints
        gaps = np.linalg.norm(np.diff(pts, axis=0), axis=1)
        too_long = np.unique(seg[1:][gaps > spacing])
        if len(too_long) == 0:
            return params, pts
        counts[too_long] *= 2
