"""Procedural test environments.

Grid archetypes mirror the eight benchmark map families (circular obstacles,
mazes, tunnels, scatter fields) with obstacle fractions in the same bands.
Every generator is deterministic in its seed and guarantees that the default
start and goal lie in one connected free region.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray
from scipy import ndimage

from .grid import GridMap

ARCHETYPES = (
    "circular",
    "irregular_maze",
    "regular_maze",
    "single_tunnel",
    "multi_tunnel",
    "circular_scatter",
    "square_scatter",
)

# start/goal on a 500x500 map, scaled linearly for other sizes
DEFAULT_ENDPOINTS = {
    "empty": ((10, 10), (490, 490)),
    "circular": ((10, 10), (490, 490)),
    "irregular_maze": ((350, 330), (490, 490)),
    "regular_maze": ((50, 170), (430, 340)),
    "single_tunnel": ((245, 10), (245, 490)),
    "multi_tunnel": ((245, 10), (245, 400)),
    "circular_scatter": ((10, 490), (490, 10)),
    "square_scatter": ((10, 490), (490, 10)),
}

# (low, high) obstacle fraction each generator aims for
FRACTION_BANDS = {
    "empty": (0.0, 0.0),
    "circular": (0.24, 0.28),
    "irregular_maze": (0.38, 0.41),
    "regular_maze": (0.12, 0.14),
    "single_tunnel": (0.39, 0.42),
    "multi_tunnel": (0.38, 0.40),
    "circular_scatter": (0.06, 0.08),
    "square_scatter": (0.24, 0.27),
}

_MAX_ATTEMPTS = 50


def default_endpoints(archetype: str, size: int = 500) -> tuple[NDArray, NDArray]:
    if archetype not in DEFAULT_ENDPOINTS:
        raise ValueError(f"unknown archetype {archetype!r}")
    s, g = DEFAULT_ENDPOINTS[archetype]
    scale = size / 500.0
    return np.array(s, dtype=float) * scale, np.array(g, dtype=float) * scale


def _grid_coords(size: int) -> tuple[NDArray, NDArray]:
    yy, xx = np.mgrid[0:size, 0:size]
    return xx + 0.5, yy + 0.5


def _discs(occ: NDArray, centers: NDArray, radii: NDArray) -> None:
    xx, yy = _grid_coords(occ.shape[0])
    for (cx, cy), r in zip(centers, radii):
        x0, x1 = int(max(cx - r - 1, 0)), int(min(cx + r + 2, occ.shape[1]))
        y0, y1 = int(max(cy - r - 1, 0)), int(min(cy + r + 2, occ.shape[0]))
        sub = (xx[y0:y1, x0:x1] - cx) ** 2 + (yy[y0:y1, x0:x1] - cy) ** 2 <= r * r
        occ[y0:y1, x0:x1] |= sub


def _thick_polyline(size: int, pts: NDArray, half_width: float) -> NDArray[np.bool_]:
    xx, yy = _grid_coords(size)
    P = np.stack([xx.ravel(), yy.ravel()], axis=1)
    inside = np.zeros(len(P), dtype=bool)
    for a, b in zip(pts[:-1], pts[1:]):
        ab = b - a
        t = np.clip(((P - a) @ ab) / max(ab @ ab, 1e-12), 0.0, 1.0)
        d2 = ((P - (a + t[:, None] * ab)) ** 2).sum(axis=1)
        inside |= d2 <= half_width**2
    return inside.reshape(size, size)


def _circular(rng, size, n_discs: int = 8):
    target = rng.uniform(*FRACTION_BANDS["circular"])
    area = size * size
    base = np.sqrt(target * area / (n_discs * np.pi))
    centers = rng.uniform(0.1 * size, 0.9 * size, (n_discs, 2))
    radii = base * rng.uniform(0.7, 1.3, n_discs)
    occ = np.zeros((size, size), dtype=bool)
    for _ in range(200):
        occ[:] = False
        _discs(occ, centers, radii)
        if occ.mean() >= target:
            break
        radii = radii * 1.02
    return occ


def _scatter(rng, size, archetype):
    target = rng.uniform(*FRACTION_BANDS[archetype])
    occ = np.zeros((size, size), dtype=bool)
    scale = size / 500.0
    while occ.mean() < target:
        c = rng.uniform(0, size, 2)
        if archetype == "circular_scatter":
            _discs(occ, c[None], np.array([rng.uniform(6, 14) * scale]))
        else:
            side = rng.uniform(20, 50) * scale
            x0, y0 = (np.floor(c - side / 2)).astype(int).clip(0, size)
            x1, y1 = (np.floor(c + side / 2)).astype(int).clip(0, size)
            occ[y0:y1, x0:x1] = True
    return occ


def _irregular_maze(rng, size):
    target = rng.uniform(*FRACTION_BANDS["irregular_maze"])
    noise = ndimage.gaussian_filter(rng.standard_normal((size, size)), sigma=10 * size / 500.0)
    return noise > np.quantile(noise, 1.0 - target)


def _regular_maze(rng, size, cells: int = 5):
    # perfect maze by randomised depth-first search over a cells x cells lattice
    target = rng.uniform(*FRACTION_BANDS["regular_maze"])
    right_wall = np.ones((cells, cells - 1), dtype=bool)
    down_wall = np.ones((cells - 1, cells), dtype=bool)
    seen = np.zeros((cells, cells), dtype=bool)
    stack = [(0, 0)]
    seen[0, 0] = True
    while stack:
        r, c = stack[-1]
        nbrs = [(r + dr, c + dc) for dr, dc in ((0, 1), (1, 0), (0, -1), (-1, 0))
                if 0 <= r + dr < cells and 0 <= c + dc < cells and not seen[r + dr, c + dc]]
        if not nbrs:
            stack.pop()
            continue
        nr, nc = nbrs[rng.integers(len(nbrs))]
        if nr == r:
            right_wall[r, min(c, nc)] = False
        else:
            down_wall[min(r, nr), c] = False
        seen[nr, nc] = True
        stack.append((nr, nc))

    pitch = size / cells

    def draw(thick):
        occ = np.zeros((size, size), dtype=bool)
        h = thick / 2
        for r, c in zip(*np.nonzero(right_wall)):
            x = (c + 1) * pitch
            occ[int(r * pitch):int((r + 1) * pitch), int(x - h):int(x + h)] = True
        for r, c in zip(*np.nonzero(down_wall)):
            y = (r + 1) * pitch
            occ[int(y - h):int(y + h), int(c * pitch):int((c + 1) * pitch)] = True
        return occ

    thick = 4.0
    occ = draw(thick)
    while occ.mean() < target and thick < pitch / 2:
        thick += 1.0
        occ = draw(thick)
    return occ


def _tunnels(rng, size, archetype):
    scale = size / 500.0
    target = rng.uniform(*FRACTION_BANDS[archetype])
    if archetype == "single_tunnel":
        n_tunnels, width, centre = 1, 30 * scale, 0.5 * size
    else:
        n_tunnels, width, centre = 3, 22 * scale, 0.44 * size
    xs = np.sort(rng.uniform(0.15 * size, 0.85 * size, n_tunnels))
    routes = []
    for x in xs:
        wiggle = rng.uniform(-0.12 * size, 0.12 * size, 2)
        routes.append(np.array([[x, -1.0], [x + wiggle[0], 0.4 * size],
                                [x + wiggle[1], 0.6 * size], [x, size + 1.0]]))
    carve = np.zeros((size, size), dtype=bool)
    for route in routes:
        carve |= _thick_polyline(size, route, width / 2)
    rows = np.arange(size)[:, None] + 0.5
    half = target * size / 2
    while True:
        band = np.broadcast_to(np.abs(rows - centre) <= half, (size, size))
        occ = band & ~carve
        if occ.mean() >= target or half > size / 2:
            return occ
        half += 1.0


def _clear(occ: NDArray, points, radius: float) -> None:
    xx, yy = _grid_coords(occ.shape[0])
    for x, y in points:
        occ[(xx - x) ** 2 + (yy - y) ** 2 <= radius * radius] = False


def _connected(occ: NDArray, a, b) -> bool:
    labels, _ = ndimage.label(~occ)
    la = labels[int(a[1]), int(a[0])]
    return la != 0 and la == labels[int(b[1]), int(b[0])]


def generate_map(archetype: str, seed: int, size: int = 500, **params) -> GridMap:
    """Generate a ``size`` x ``size`` occupancy grid of the given archetype.

    ``params`` accepts ``n_discs`` for the circular archetype.  Generation
    retries with derived seeds until start and goal are connected.
    """
    if archetype not in DEFAULT_ENDPOINTS:
        raise ValueError(f"unknown archetype {archetype!r}; choose from {', '.join(DEFAULT_ENDPOINTS)}")
    if size < 50:
        raise ValueError("map size must be at least 50")
    start, goal = default_endpoints(archetype, size)
    if archetype == "empty":
        return GridMap(np.zeros((size, size), dtype=bool))

    for attempt in range(_MAX_ATTEMPTS):
        rng = np.random.default_rng([seed, attempt])
        if archetype == "circular":
            occ = _circular(rng, size, n_discs=int(params.get("n_discs", 8)))
        elif archetype in ("circular_scatter", "square_scatter"):
            occ = _scatter(rng, size, archetype)
        elif archetype == "irregular_maze":
            occ = _irregular_maze(rng, size)
        elif archetype == "regular_maze":
            occ = _regular_maze(rng, size)
        else:
            occ = _tunnels(rng, size, archetype)
        _clear(occ, (start, goal), 12 * size / 500.0)
        # connectivity with a small clearance margin so step-sized edges fit
        if _connected(ndimage.binary_dilation(occ, iterations=2), start, goal):
            return GridMap(occ)
    raise RuntimeError(f"could not generate a connected {archetype} map for seed {seed}")


def partitioned_map(size: int = 500, thickness: int = 10) -> GridMap:
    """Map split by a full-height wall: no path exists between the halves."""
    occ = np.zeros((size, size), dtype=bool)
    mid = size // 2
    occ[:, mid - thickness // 2: mid + (thickness + 1) // 2] = True
    return GridMap(occ)


def switchback_map(
    size: int = 300, lanes: int = 4, wall: int = 8, gap: int = 40
) -> tuple[GridMap, NDArray, NDArray]:
    """Serpentine corridor: ``lanes`` horizontal lanes split by walls that
    leave a ``gap`` at alternating ends, so every lane change is a hairpin.

    Returns the map, a start in the first lane and a goal at the far end of
    the last one.
    """
    if lanes < 2 or not 0 < gap < size:
        raise ValueError("need lanes >= 2 and 0 < gap < size")
    occ = np.zeros((size, size), dtype=bool)
    occ[:3, :] = occ[-3:, :] = occ[:, :3] = occ[:, -3:] = True
    pitch = size / lanes
    for k in range(1, lanes):
        y = int(k * pitch)
        rows = slice(y - wall // 2, y + (wall + 1) // 2)
        if k % 2:
            occ[rows, : size - gap] = True
        else:
            occ[rows, gap:] = True
    start = np.array([20.0, 20.0])
    end_x = 20.0 if lanes % 2 == 0 else size - 20.0
    goal = np.array([end_x, size - 20.0])
    return GridMap(occ), start, goal


# ----------------------------------------------------------------------
# synthetic point clouds

def _lattice_face(lo, hi, spacing, fixed_axis, fixed_value):
    axes = [a for a in range(3) if a != fixed_axis]
    grids = [np.arange(lo[a], hi[a] + 0.5 * spacing, spacing) for a in axes]
    u, v = np.meshgrid(*grids, indexing="ij")
    face = np.empty((u.size, 3))
    face[:, axes[0]] = u.ravel()
    face[:, axes[1]] = v.ravel()
    face[:, fixed_axis] = fixed_value
    return face


def building_cloud(
    spacing: float,
    extent=(20.0, 20.0, 8.0),
    n_buildings: int = 4,
    seed: int = 0,
    ground: bool = True,
) -> NDArray:
    """Lattice-sampled box buildings on a ground plane.

    Every surface is sampled on a grid of pitch ``spacing`` aligned to a
    common lattice, so the nearest-neighbour distance is ``spacing``.
    """
    rng = np.random.default_rng(seed)
    ex, ey, ez = extent
    parts = []
    if ground:
        parts.append(_lattice_face(np.zeros(3), np.array([ex, ey, 0.0]), spacing, 2, 0.0))
    for _ in range(n_buildings):
        w, d = rng.uniform(0.12, 0.25, 2) * np.array([ex, ey])
        h = rng.uniform(0.4, 0.9) * ez
        x0 = rng.uniform(0.1 * ex, 0.9 * ex - w)
        y0 = rng.uniform(0.1 * ey, 0.9 * ey - d)
        lo = np.round(np.array([x0, y0, 0.0]) / spacing) * spacing
        hi = np.round(np.array([x0 + w, y0 + d, h]) / spacing) * spacing
        parts.append(_lattice_face(lo, hi, spacing, 2, hi[2]))
        for ax in (0, 1):
            parts.append(_lattice_face(lo, hi, spacing, ax, lo[ax]))
            parts.append(_lattice_face(lo, hi, spacing, ax, hi[ax]))
    pts = np.concatenate(parts)
    # snap to the shared lattice so coincident samples merge exactly
    pts = np.round(pts / spacing) * spacing
    return np.unique(pts, axis=0)


def wall_cloud(spacing: float, width: float = 10.0, height: float = 10.0, x: float = 0.0) -> NDArray:
    """Planar wall x = const sampled on a square lattice over y, z in [0, width] x [0, height]."""
    lo = np.array([x, 0.0, 0.0])
    hi = np.array([x, width, height])
    return _lattice_face(lo, hi, spacing, 0, x)
