"""2-D occupancy grids: loading, saving and collision queries."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.typing import ArrayLike, NDArray

# coordinates closer than this (in cell units) to a grid line count as on it
_ON_LINE_EPS = 1e-9
# clearance marching: step budget and the clearance (cells) below which a
# segment is handed to the exact supercover test
_MARCH_STEPS = 12
_MARCH_MIN = 0.5


@dataclass(frozen=True, eq=False)
class GridMap:
    """Boolean occupancy grid; ``occupancy[row, col]`` is True for obstacles.

    A point ``(x, y)`` in map units falls in column ``floor(x / resolution)``
    and row ``floor(y / resolution)``.  Anything outside the grid collides.
    """

    occupancy: NDArray[np.bool_]
    resolution: float = 1.0

    def __post_init__(self):
        occ = np.array(self.occupancy, dtype=bool)
        if occ.ndim != 2 or min(occ.shape) < 2:
            raise ValueError(f"grid must be at least 2x2, got shape {occ.shape}")
        if self.resolution <= 0:
            raise ValueError("resolution must be positive")
        occ.setflags(write=False)
        object.__setattr__(self, "occupancy", occ)
        object.__setattr__(self, "_tables", _touch_tables(occ))
        object.__setattr__(self, "_clearance", _clearance_bound(occ))
        # nested lists index faster than arrays from scalar code
        object.__setattr__(self, "_clear_rows", self._clearance.tolist())
        object.__setattr__(self, "_blocked_rows", self._tables[0].tolist())

    dim = 2

    @property
    def height(self) -> int:
        return self.occupancy.shape[0]

    @property
    def width(self) -> int:
        return self.occupancy.shape[1]

    @property
    def bounds(self) -> tuple[NDArray, NDArray]:
        return np.zeros(2), np.array([self.width, self.height]) * self.resolution

    @property
    def obstacle_fraction(self) -> float:
        return float(self.occupancy.mean())

    def points_free(self, points: ArrayLike) -> NDArray[np.bool_]:
        p = np.atleast_2d(np.asarray(points, dtype=float)) / self.resolution
        if p.shape[1] != 2:
            raise ValueError("dimension mismatch: grid maps are 2-D")
        col = np.floor(p[:, 0])
        row = np.floor(p[:, 1])
        inside = (col >= 0) & (col < self.width) & (row >= 0) & (row < self.height)
        free = np.zeros(len(p), dtype=bool)
        free[inside] = ~self.occupancy[row[inside].astype(np.intp), col[inside].astype(np.intp)]
        return free

    def point_free(self, p: ArrayLike) -> bool:
        p = np.asarray(p, dtype=float)
        if p.shape != (2,):
            return bool(self.points_free(p)[0])
        col = math.floor(float(p[0]) / self.resolution)
        row = math.floor(float(p[1]) / self.resolution)
        return 0 <= col < self.width and 0 <= row < self.height and not self._blocked_rows[row + 1][col + 1]

    def segments_free(self, starts: ArrayLike, ends: ArrayLike) -> NDArray[np.bool_]:
        """Supercover test: a segment is free iff every cell whose closed
        square it touches is in bounds and unoccupied."""
        P = np.atleast_2d(np.asarray(starts, dtype=float)) / self.resolution
        Q = np.atleast_2d(np.asarray(ends, dtype=float)) / self.resolution
        if P.shape != Q.shape or P.shape[1] != 2:
            raise ValueError("dimension mismatch: grid maps are 2-D")
        if len(P) == 0:
            return np.zeros(0, dtype=bool)
        result = self._surely_free(P, Q)
        todo = np.flatnonzero(~result)
        if len(todo):
            todo = todo[~self._quick_reject(P[todo], Q[todo])]
        if len(todo):
            result[todo] = self._supercover_free(P[todo], Q[todo])
        return result

    def _surely_free(self, P: NDArray, Q: NDArray) -> NDArray[np.bool_]:
        D = Q - P
        length = np.sqrt((D * D).sum(axis=1))
        # the whole segment lies within half its length of the midpoint
        done = 0.5 * length < self._clearance_at(P + 0.5 * D)
        active = np.flatnonzero(~done)
        if len(active) == 0:
            return done
        # march from P: clearance c at the current point proves the next c
        # units free; give up once clearance gets small
        unit = D[active] / np.maximum(length[active], 1e-300)[:, None]
        start, left = P[active], length[active]
        s = np.zeros(len(active))
        for _ in range(_MARCH_STEPS):
            c = self._clearance_at(start + s[:, None] * unit)
            s += c
            finished = s > left
            done[active[finished]] = True
            keep = ~finished & (c >= _MARCH_MIN)
            if not keep.any():
                break
            active, start, unit, left, s = active[keep], start[keep], unit[keep], left[keep], s[keep]
        return done

    def _clearance_at(self, x: NDArray) -> NDArray:
        return self._clearance[self._padded_index(np.floor(x))]

    def _padded_index(self, cells: NDArray) -> tuple[NDArray, NDArray]:
        # cell coordinates -> indices into the padded tables; anything
        # outside lands on the blocked border ring
        col = np.minimum(np.maximum(cells[..., 0], -1.0), self.width) + 1
        row = np.minimum(np.maximum(cells[..., 1], -1.0), self.height) + 1
        return row.astype(np.intp), col.astype(np.intp)

    def _quick_reject(self, P: NDArray, Q: NDArray) -> NDArray[np.bool_]:
        # points on the segment lying in an occupied cell prove a hit
        length = np.abs(Q - P).max(axis=1)
        counts = np.ceil(length * 2.0).astype(np.intp) + 1
        seg = np.repeat(np.arange(len(P)), counts)
        offsets = np.concatenate([[0], np.cumsum(counts)[:-1]])
        frac = (np.arange(len(seg)) - offsets[seg]) / np.maximum(counts[seg] - 1, 1)
        pts = np.floor(P[seg] + frac[:, None] * (Q - P)[seg])
        hit = self._tables[0][self._padded_index(pts)]
        return np.logical_or.reduceat(hit, offsets)

    def _supercover_free(self, P: NDArray, Q: NDArray) -> NDArray[np.bool_]:
        D = Q - P
        ts = [np.zeros((len(P), 1)), np.ones((len(P), 1))]
        for ax in range(2):
            lo = np.minimum(P[:, ax], Q[:, ax])
            hi = np.maximum(P[:, ax], Q[:, ax])
            first = np.floor(lo) + 1.0
            count = int(np.max(np.ceil(hi) - first)) + 1 if len(P) else 0
            if count <= 0:
                continue
            lines = first[:, None] + np.arange(count)[None, :]
            valid = lines < hi[:, None]
            with np.errstate(divide="ignore", invalid="ignore"):
                t = (lines - P[:, ax, None]) / D[:, ax, None]
            ts.append(np.where(valid, t, 1.0))
        t = np.sort(np.concatenate(ts, axis=1), axis=1)
        t = np.concatenate([t, 0.5 * (t[:, 1:] + t[:, :-1])], axis=1)
        pts = P[:, None, :] + t[..., None] * D[:, None, :]

        nearest_line = np.round(pts)
        on_line = np.abs(pts - nearest_line) < _ON_LINE_EPS
        # on a grid line, index the cell on its high side; the table entry
        # already merges in the low-side neighbour
        idx = np.where(on_line, nearest_line, np.floor(pts))
        code = on_line[..., 0] + 2 * on_line[..., 1]
        blocked = self._tables[(code,) + self._padded_index(idx)]
        return ~blocked.any(axis=1)

    def segment_free(self, p: ArrayLike, q: ArrayLike) -> bool:
        # scalar path: per-call numpy overhead dominates for one segment
        p = np.asarray(p, dtype=float)
        q = np.asarray(q, dtype=float)
        if p.shape != (2,) or q.shape != (2,):
            return bool(self.segments_free(p, q)[0])
        inv = 1.0 / self.resolution
        px, py = float(p[0]) * inv, float(p[1]) * inv
        dx, dy = float(q[0]) * inv - px, float(q[1]) * inv - py
        length = math.hypot(dx, dy)
        ux, uy = (dx / length, dy / length) if length > 0 else (0.0, 0.0)
        clear, blocked = self._clear_rows, self._blocked_rows
        w, h = self.width, self.height
        s = 0.0
        near_obstacle = False
        while True:
            at_end = s >= length
            if at_end:
                s = length
            col = min(max(math.floor(px + s * ux), -1), w) + 1
            row = min(max(math.floor(py + s * uy), -1), h) + 1
            if blocked[row][col]:
                return False
            c = clear[row][col]
            if at_end:
                near_obstacle = near_obstacle or c < _MARCH_MIN
                break
            if c >= _MARCH_MIN:
                s += c
                if s > length:
                    break
            else:
                near_obstacle = True
                s += 0.5
        if not near_obstacle:
            return True
        P = np.array([[px, py]])
        return bool(self._supercover_free(P, P + [[dx, dy]])[0])

    def sample(self, rng: np.random.Generator, n: int) -> NDArray:
        lo, hi = self.bounds
        return lo + rng.random((n, 2)) * (hi - lo)


def _touch_tables(occ: NDArray[np.bool_]) -> NDArray[np.bool_]:
    """Blocked flags for a point, indexed ``[code, row + 1, col + 1]``.

    ``code`` says which coordinates sit on a grid line (bit 0: x, bit 1: y);
    a point on a line touches the cells on both sides.  The border ring of
    padding stands for everything outside the map.
    """
    pad = np.pad(occ, 1, constant_values=True)
    left = pad.copy()
    left[:, 1:] |= pad[:, :-1]
    down = pad.copy()
    down[1:, :] |= pad[:-1, :]
    both = left.copy()
    both[1:, :] |= left[:-1, :]
    return np.stack([pad, left, down, both])


def _clearance_bound(occ: NDArray[np.bool_]) -> NDArray:
    """Lower bound on the distance from any point of a cell to the nearest
    closed blocked square, indexed like the padded grid.

    Two unit cells whose integer offset is ``k`` are at least
    ``|max(|k| - 1, 0)|`` apart, which is the distance transform of the
    blocked set grown by one cell in all eight directions.
    """
    from scipy.ndimage import binary_dilation, distance_transform_edt

    pad = np.pad(occ, 1, constant_values=True)
    grown = binary_dilation(pad, structure=np.ones((3, 3), dtype=bool))
    return distance_transform_edt(~grown)


# ----------------------------------------------------------------------
# file IO

def _read_pnm(path: Path) -> NDArray[np.uint8]:
    data = path.read_bytes()
    tokens: list[bytes] = []
    pos = 0
    # magic, width, height, maxval; comments start with '#'
    while len(tokens) < 4:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ValueError(f"{path}: truncated PGM header")
        tokens.append(data[start:pos])
    magic = tokens[0]
    width, height, maxval = (int(t) for t in tokens[1:])
    if magic == b"P5":
        if maxval > 255:
            raise ValueError(f"{path}: 16-bit PGM not supported")
        raw = np.frombuffer(data[pos + 1:pos + 1 + width * height], dtype=np.uint8)
        if raw.size != width * height:
            raise ValueError(f"{path}: truncated PGM pixel data")
        img = raw.reshape(height, width)
    elif magic == b"P2":
        vals = np.array(data[pos:].split(), dtype=np.int64)
        if vals.size != width * height:
            raise ValueError(f"{path}: expected {width * height} pixels, found {vals.size}")
        img = vals.reshape(height, width)
    else:
        raise ValueError(f"{path}: not a grayscale PGM (magic {magic!r})")
    if maxval != 255:
        img = np.round(img.astype(float) * 255.0 / maxval)
    return img.astype(np.uint8)


def _read_ascii_grid(path: Path) -> NDArray[np.bool_]:
    rows = []
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        cells = line.replace(",", " ").split()
        if len(cells) == 1 and len(cells[0]) > 1:
            cells = list(cells[0])
        if any(c not in ("0", "1") for c in cells):
            raise ValueError(f"{path}:{lineno}: grid cells must be 0 or 1")
        rows.append([c == "1" for c in cells])
    if not rows:
        raise ValueError(f"{path}: empty grid")
    if len({len(r) for r in rows}) != 1:
        raise ValueError(f"{path}: ragged grid rows")
    return np.array(rows, dtype=bool)


def load_grid(source: str | Path, threshold: int = 128, resolution: float = 1.0) -> GridMap:
    """Load an occupancy grid.

    PGM/PNG images are read as 8-bit grayscale and pixels darker than
    ``threshold`` become obstacles.  ``.txt``/``.grid`` files hold rows of
    0/1 cells with 1 meaning obstacle.
    """
    path = Path(source)
    if not path.is_file():
        raise FileNotFoundError(f"cannot read map {path}")
    suffix = path.suffix.lower()
    if suffix in (".txt", ".grid", ".asc"):
        occ = _read_ascii_grid(path)
    elif suffix in (".pgm", ".pnm"):
        occ = _read_pnm(path) < threshold
    else:
        from PIL import Image

        try:
            with Image.open(path) as im:
                img = np.asarray(im.convert("L"))
        except OSError as exc:
            raise ValueError(f"{path}: unreadable image ({exc})") from exc
        occ = img < threshold
    if occ.size == 0:
        raise ValueError(f"{path}: zero-size map")
    return GridMap(occ, resolution=resolution)


def save_grid(grid: GridMap, dest: str | Path) -> Path:
    """Write as binary PGM (obstacles black, free white) or ASCII 0/1 grid."""
    path = Path(dest)
    if path.suffix.lower() in (".txt", ".grid", ".asc"):
        lines = ["".join("1" if c else "0" for c in row) for row in grid.occupancy]
        path.write_text("\n".join(lines) + "\n")
        return path
    pixels = np.where(grid.occupancy, 0, 255).astype(np.uint8)
    if path.suffix.lower() == ".png":
        from PIL import Image

        Image.fromarray(pixels, mode="L").save(path, optimize=False)
        return path
    header = f"P5\n{grid.width} {grid.height}\n255\n".encode("ascii")
    path.write_bytes(header + pixels.tobytes())
    return path
