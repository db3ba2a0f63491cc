"""Deterministic SVG pictures of maps, search trees and trajectories."""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence
from xml.sax.saxutils import escape

import numpy as np
from numpy.typing import NDArray

from .workspace import CloudMap, GridMap

STAGE_COLORS = {
    "raw": "#f28e2b",
    "downsample": "#4e79a7",
    "upsample": "#59a14f",
    "smooth": "#e15759",
}
_EXTRA_COLORS = ("#b07aa1", "#76b7b2", "#edc948", "#9c755f", "#ff9da7", "#bab0ac")
TREE_COLORS = ("#8cd17d", "#a0cbe8")
MAX_CLOUD_POINTS = 4000
PANEL = 360.0
_PROJECTIONS = (("xy", (0, 1)), ("xz", (0, 2)), ("yz", (1, 2)))


def _num(v: float) -> str:
    s = f"{v:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _points_attr(pts: NDArray) -> str:
    return " ".join(f"{_num(x)},{_num(y)}" for x, y in pts)


def _stage_color(name: str, k: int) -> str:
    return STAGE_COLORS.get(name, _EXTRA_COLORS[k % len(_EXTRA_COLORS)])


def _obstacle_rects(occ: NDArray[np.bool_]) -> list[tuple[int, int, int, int]]:
    """Cover blocked cells with rectangles: runs along each row, merged
    downward while the next row has the identical run."""
    open_runs: dict[tuple[int, int], int] = {}  # (x0, x1) -> first row
    rects = []
    for y in range(occ.shape[0] + 1):
        runs = set()
        if y < occ.shape[0]:
            row = np.concatenate([[False], occ[y], [False]])
            edges = np.flatnonzero(row[1:] != row[:-1])
            runs = set(zip(edges[::2].tolist(), edges[1::2].tolist()))
        for run in sorted(set(open_runs) - runs):
            y0 = open_runs.pop(run)
            rects.append((run[0], y0, run[1] - run[0], y - y0))
        for run in sorted(runs - set(open_runs)):
            open_runs[run] = y
    return sorted(rects, key=lambda r: (r[1], r[0]))


def _subsample(cloud: NDArray, limit: int = MAX_CLOUD_POINTS) -> NDArray:
    """Lexicographically sorted, then every k-th point: independent of the
    input order."""
    pts = cloud[np.lexsort(cloud.T[::-1])]
    if len(pts) <= limit:
        return pts
    step = int(np.ceil(len(pts) / limit))
    return pts[::step]


def _tree_path(tree, axes, tf) -> str:
    nodes, parent = tree.nodes, tree.parent
    parts = []
    for i in range(1, len(nodes)):
        a = tf(nodes[parent[i]][list(axes)])
        b = tf(nodes[i][list(axes)])
        parts.append(f"M{_num(a[0])} {_num(a[1])}L{_num(b[0])} {_num(b[1])}")
    return "".join(parts)


def _panel(
    out: list[str],
    ws,
    axes: tuple[int, int],
    lo: NDArray,
    hi: NDArray,
    scale: float,
    origin: tuple[float, float],
    trees: Sequence,
    stages: Mapping[str, NDArray],
    endpoints: Sequence[NDArray],
    label: str | None,
) -> None:
    ox, oy = origin
    lo2, hi2 = lo[list(axes)], hi[list(axes)]
    w, h = (hi2 - lo2) * scale

    if isinstance(ws, GridMap):
        # image orientation: row 0 at the top, as in the map file
        def tf(p):
            return np.array([ox + (p[0] - lo2[0]) * scale, oy + (p[1] - lo2[1]) * scale])
    else:
        # plot orientation: second axis points up
        def tf(p):
            return np.array([ox + (p[0] - lo2[0]) * scale, oy + h - (p[1] - lo2[1]) * scale])

    out.append(f'<g class="panel"{f" data-view={chr(34)}{label}{chr(34)}" if label else ""}>')
    out.append(f'<rect x="{_num(ox)}" y="{_num(oy)}" width="{_num(w)}" height="{_num(h)}" fill="#ffffff" stroke="#333333"/>')
    if label:
        out.append(f'<text x="{_num(ox + 4)}" y="{_num(oy + 14)}" font-size="12">{label}</text>')

    out.append('<g class="obstacles" fill="#303030">')
    if isinstance(ws, GridMap):
        r = ws.resolution * scale
        for x, y, cw, ch in _obstacle_rects(ws.occupancy):
            out.append(
                f'<rect x="{_num(ox + x * r)}" y="{_num(oy + y * r)}" width="{_num(cw * r)}" height="{_num(ch * r)}"/>'
            )
    else:
        rad = max(0.8, min(2.0, 0.25 * ws.safe_dist * scale))
        for p in _subsample(ws.cloud):
            q = tf(p[list(axes)])
            out.append(f'<circle cx="{_num(q[0])}" cy="{_num(q[1])}" r="{_num(rad)}"/>')
    out.append("</g>")

    for k, tree in enumerate(trees):
        if tree is None or len(tree) < 2:
            continue
        cls = "tree tree-a" if k == 0 else "tree tree-b"
        out.append(
            f'<path class="{cls}" d="{_tree_path(tree, axes, tf)}" fill="none" '
            f'stroke="{TREE_COLORS[k % 2]}" stroke-width="0.8"/>'
        )

    for k, (name, pts) in enumerate(stages.items()):
        pts = np.asarray(pts, dtype=float)
        proj = np.array([tf(p[list(axes)]) for p in pts])
        dash = ' stroke-dasharray="4 3"' if name == "smooth" else ""
        out.append(
            f'<polyline class="stage stage-{escape(name)}" points="{_points_attr(proj)}" fill="none" '
            f'stroke="{_stage_color(name, k)}" stroke-width="2"{dash}/>'
        )

    for k, p in enumerate(endpoints):
        q = tf(np.asarray(p, dtype=float)[list(axes)])
        fill = "#1f77b4" if k == 0 else "#d62728"
        out.append(f'<circle class="endpoint" cx="{_num(q[0])}" cy="{_num(q[1])}" r="4" fill="{fill}"/>')
    out.append("</g>")


def render_svg(
    ws,
    result=None,
    stages: Mapping[str, NDArray] | None = None,
    out: str | Path | None = None,
    endpoints: Sequence[NDArray] | None = None,
) -> str:
    """Draw ``ws``, the trees of ``result`` and each stage polyline.

    2-D workspaces give one panel; 3-D clouds give three orthographic
    projections (xy, xz, yz).  Output depends only on the inputs, so equal
    inputs produce byte-identical files.
    """
    stages = dict(stages or {})
    trees = [] if result is None else [result.tree_a, result.tree_b]
    if endpoints is None:
        if result is not None:
            endpoints = [result.tree_a.root] + ([result.tree_b.root] if result.tree_b is not None else [])
        else:
            endpoints = []
    if isinstance(ws, CloudMap):
        lo, hi = ws.bounds
        lo = np.minimum(lo, ws.cloud.min(axis=0))
        hi = np.maximum(hi, ws.cloud.max(axis=0))
    else:
        lo, hi = ws.bounds
    span = np.maximum(hi - lo, 1e-9)

    body: list[str] = []
    margin = 10.0
    if ws.dim == 2:
        scale = PANEL / float(span.max()) if isinstance(ws, CloudMap) else min(1.0, 1000.0 / float(span.max()))
        _panel(body, ws, (0, 1), lo, hi, scale, (margin, margin), trees, stages, endpoints, None)
        width = span[0] * scale + 2 * margin
        height = span[1] * scale + 2 * margin
    else:
        scale = PANEL / float(span.max())
        x = margin
        height = 0.0
        for label, axes in _PROJECTIONS:
            _panel(body, ws, axes, lo, hi, scale, (x, margin + 16), trees, stages, endpoints, label)
            x += span[axes[0]] * scale + margin
            height = max(height, span[axes[1]] * scale)
        width = x
        height += 2 * margin + 16

    legend = []
    ly = height + 6
    entries = [(f"tree {'ab'[k]}", TREE_COLORS[k]) for k, t in enumerate(trees) if t is not None and len(t) > 1]
    entries += [(name, _stage_color(name, k)) for k, name in enumerate(stages)]
    for k, (name, color) in enumerate(entries):
        y = ly + 16 * k
        legend.append(
            f'<line x1="{_num(margin)}" y1="{_num(y + 6)}" x2="{_num(margin + 24)}" y2="{_num(y + 6)}" '
            f'stroke="{color}" stroke-width="3"/>'
        )
        legend.append(f'<text x="{_num(margin + 30)}" y="{_num(y + 10)}" font-size="12">{escape(name)}</text>')
    total_h = ly + 16 * len(entries) + margin

    svg = "\n".join(
        [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{_num(width)}" height="{_num(total_h)}" '
            f'viewBox="0 0 {_num(width)} {_num(total_h)}">',
            *body,
            '<g class="legend">',
            *legend,
            "</g>",
            "</svg>",
            "",
        ]
    )
    if out is not None:
        Path(out).write_text(svg)
    return svg


def pipeline_stages(pipeline) -> dict[str, NDArray]:
    """Stage polylines of an optimizer run, in processing order."""
    return {
        "raw": pipeline.raw,
        "downsample": pipeline.downsampled,
        "upsample": pipeline.upsampled,
        "smooth": pipeline.trajectory,
    }
