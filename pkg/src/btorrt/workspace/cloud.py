"""Point-cloud workspaces: ASCII cloud IO, density analysis and clearance checks."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..spatial import KdTree, sq_norm

DEFAULT_ALPHA = 0.75
DEFAULT_STEP_COEFF = 4.0


class CloudFormatError(ValueError):
    """Malformed point-cloud file; the message names the offending line."""


@dataclass(frozen=True)
class DensityReport:
    mean_nn_dist: float
    std_nn_dist: float
    step_size: float
    safe_dist: float
    alpha: float

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=False)


def analyze_density(
    cloud: ArrayLike,
    alpha: float = DEFAULT_ALPHA,
    step_coeff: float = DEFAULT_STEP_COEFF,
) -> DensityReport:
    """Derive step size and safe distance from nearest-neighbour spacing.

    The mean distance from each point to its nearest distinct neighbour is
    scaled by ``step_coeff`` to give the step size; the safe distance is
    ``alpha`` times the step size.
    """
    pts = np.asarray(cloud, dtype=float)
    if pts.ndim != 2 or len(pts) < 2:
        raise ValueError("density analysis needs at least 2 points")
    if not 0 < alpha <= 1:
        raise ValueError(f"alpha must be in (0, 1], got {alpha}")
    if step_coeff <= 0:
        raise ValueError(f"step_coeff must be positive, got {step_coeff}")
    unique = np.unique(pts, axis=0)
    if len(unique) < 2:
        raise ValueError("density analysis needs at least 2 distinct points")
    tree = KdTree(unique)
    _, nn = tree.nearest_many(unique, exclude=np.arange(len(unique)))
    mean = float(nn.mean())
    step = step_coeff * mean
    return DensityReport(
        mean_nn_dist=mean,
        std_nn_dist=float(nn.std()),
        step_size=step,
        safe_dist=alpha * step,
        alpha=alpha,
    )


class CloudMap:
    """Workspace whose obstacles are the points of a cloud.

    A position is free when every cloud point lies strictly farther than
    the safe distance ``S = alpha * step_size``.  ``bounds`` only limits
    where free-space samples are drawn; it defaults to the cloud's box.
    """

    def __init__(
        self,
        cloud: ArrayLike,
        step_size: float,
        alpha: float = DEFAULT_ALPHA,
        bounds: tuple[ArrayLike, ArrayLike] | None = None,
    ):
        if step_size <= 0:
            raise ValueError("step_size must be positive")
        if not 0 < alpha <= 1:
            raise ValueError(f"alpha must be in (0, 1], got {alpha}")
        self.index = KdTree(cloud)
        self.cloud = self.index.points
        self.dim = self.index.dim
        self.step_size = float(step_size)
        self.alpha = float(alpha)
        self.safe_dist = self.alpha * self.step_size
        if bounds is None:
            lo, hi = self.cloud.min(axis=0), self.cloud.max(axis=0)
        else:
            lo, hi = (np.asarray(b, dtype=float) for b in bounds)
        self.bounds = (np.array(lo, dtype=float), np.array(hi, dtype=float))

    @classmethod
    def from_density(
        cls,
        cloud: ArrayLike,
        alpha: float = DEFAULT_ALPHA,
        step_coeff: float = DEFAULT_STEP_COEFF,
        bounds=None,
    ) -> tuple[CloudMap, DensityReport]:
        report = analyze_density(cloud, alpha=alpha, step_coeff=step_coeff)
        return cls(cloud, report.step_size, alpha=alpha, bounds=bounds), report

    def clearance(self, points: ArrayLike) -> NDArray:
        """Distance from each point to its nearest cloud point."""
        return self.index.nearest_many(points)[1]

    def points_free(self, points: ArrayLike) -> NDArray[np.bool_]:
        P = np.atleast_2d(np.asarray(points, dtype=float))
        if P.shape[1] != self.dim:
            raise ValueError(f"dimension mismatch: cloud is {self.dim}-D")
        return ~self.index.any_within(P, self.safe_dist)

    def point_free(self, p: ArrayLike) -> bool:
        return bool(self.points_free(p)[0])

    def segments_free(self, starts: ArrayLike, ends: ArrayLike) -> NDArray[np.bool_]:
        """Free iff every cloud point is farther than S from the segment.

        Exact point-to-segment distances, so a free verdict at S stays free
        for any smaller S.  Long segments are cut into chunks no longer than
        S to keep each chunk's candidate ball small.
        """
        P = np.atleast_2d(np.asarray(starts, dtype=float))
        Q = np.atleast_2d(np.asarray(ends, dtype=float))
        if P.shape != Q.shape or P.shape[1] != self.dim:
            raise ValueError(f"dimension mismatch: cloud is {self.dim}-D")
        if len(P) == 0:
            return np.zeros(0, dtype=bool)
        S = self.safe_dist
        D = Q - P
        counts = np.maximum(np.ceil(np.linalg.norm(D, axis=1) / S), 1).astype(np.intp)
        seg = np.repeat(np.arange(len(P)), counts)
        offsets = np.concatenate([[0], np.cumsum(counts)[:-1]])
        k = np.arange(counts.sum()) - np.repeat(offsets, counts)
        A = P[seg] + (k / counts[seg])[:, None] * D[seg]
        B = P[seg] + ((k + 1) / counts[seg])[:, None] * D[seg]
        B[k == counts[seg] - 1] = Q[seg[k == counts[seg] - 1]]
        mid = 0.5 * (A + B)
        reach = 0.5 * np.linalg.norm(B - A, axis=1) + S
        blocked = np.zeros(len(A), dtype=bool)
        for rows, idx in self.index._radius_pairs(mid, reach, stop_on_hit=False):
            a, ab = A[rows], B[rows] - A[rows]
            c = self.cloud[idx]
            den = sq_norm(ab)
            t = np.clip(np.where(den > 0, np.einsum("ij,ij->i", c - a, ab) / np.where(den > 0, den, 1.0), 0.0), 0.0, 1.0)
            d = np.sqrt(sq_norm(a + t[:, None] * ab - c))
            blocked[rows[d <= S]] = True
        return ~np.logical_or.reduceat(blocked, offsets)

    def segment_free(self, p: ArrayLike, q: ArrayLike) -> bool:
        return bool(self.segments_free(p, q)[0])

    def sample(self, rng: np.random.Generator, n: int) -> NDArray:
        lo, hi = self.bounds
        return lo + rng.random((n, self.dim)) * (hi - lo)


# ----------------------------------------------------------------------
# file IO

def _parse_floats(tokens: list[str], count: int, where: str) -> list[float]:
    if len(tokens) < count:
        raise CloudFormatError(f"{where}: expected {count} values, found {len(tokens)}")
    try:
        return [float(t) for t in tokens]
    except ValueError as exc:
        raise CloudFormatError(f"{where}: non-numeric value ({exc})") from None


def _read_ply(lines: list[str], name: str) -> NDArray:
    if not lines or lines[0].strip() != "ply":
        raise CloudFormatError(f"{name}:1: missing 'ply' magic")
    fmt = None
    elements: list[tuple[str, int, list[str]]] = []
    body = None
    for i, raw in enumerate(lines[1:], start=2):
        tok = raw.split()
        if not tok or tok[0] in ("comment", "obj_info"):
            continue
        if tok[0] == "format":
            fmt = tok[1] if len(tok) > 1 else None
        elif tok[0] == "element":
            if len(tok) != 3 or not tok[2].isdigit():
                raise CloudFormatError(f"{name}:{i}: malformed element line")
            elements.append((tok[1], int(tok[2]), []))
        elif tok[0] == "property":
            if not elements:
                raise CloudFormatError(f"{name}:{i}: property before element")
            if tok[1] == "list":
                elements[-1][2].append("__list__")
            else:
                elements[-1][2].append(tok[-1])
        elif tok[0] == "end_header":
            body = i
            break
        else:
            raise CloudFormatError(f"{name}:{i}: unexpected header keyword {tok[0]!r}")
    if body is None:
        raise CloudFormatError(f"{name}: missing end_header")
    if fmt != "ascii":
        raise CloudFormatError(f"{name}: only ASCII PLY is supported (format {fmt})")

    line = body
    points = None
    for elem, count, props in elements:
        if elem != "vertex":
            line += count
            continue
        try:
            cols = [props.index(a) for a in ("x", "y", "z")]
        except ValueError:
            raise CloudFormatError(f"{name}: vertex element lacks x/y/z properties") from None
        if "__list__" in props:
            raise CloudFormatError(f"{name}: list properties on vertex are not supported")
        rows = []
        for k in range(count):
            lineno = line + k + 1
            if lineno > len(lines):
                raise CloudFormatError(f"{name}:{lineno}: unexpected end of file")
            vals = _parse_floats(lines[lineno - 1].split(), len(props), f"{name}:{lineno}")
            rows.append([vals[c] for c in cols])
        points = np.array(rows, dtype=float).reshape(-1, 3)
        line += count
    if points is None:
        raise CloudFormatError(f"{name}: no vertex element")
    return points


def _read_pcd(lines: list[str], name: str) -> NDArray:
    fields = None
    npts = None
    for i, raw in enumerate(lines, start=1):
        tok = raw.split()
        if not tok or tok[0].startswith("#"):
            continue
        key = tok[0].upper()
        if key == "FIELDS":
            fields = tok[1:]
        elif key == "POINTS":
            npts = int(tok[1])
        elif key == "DATA":
            if len(tok) < 2 or tok[1].lower() != "ascii":
                raise CloudFormatError(f"{name}:{i}: only DATA ascii is supported")
            if fields is None:
                raise CloudFormatError(f"{name}:{i}: DATA before FIELDS")
            try:
                cols = [fields.index(a) for a in ("x", "y", "z")]
            except ValueError:
                raise CloudFormatError(f"{name}:{i}: FIELDS lacks x y z") from None
            rows = []
            for j, row in enumerate(lines[i:], start=i + 1):
                if not row.strip():
                    continue
                vals = _parse_floats(row.split(), len(fields), f"{name}:{j}")
                rows.append([vals[c] for c in cols])
            if npts is not None and npts != len(rows):
                raise CloudFormatError(f"{name}: header declares {npts} points, found {len(rows)}")
            return np.array(rows, dtype=float).reshape(-1, 3)
        elif key not in ("VERSION", "SIZE", "TYPE", "COUNT", "WIDTH", "HEIGHT", "VIEWPOINT"):
            raise CloudFormatError(f"{name}:{i}: unexpected header keyword {tok[0]!r}")
    raise CloudFormatError(f"{name}: missing DATA line")


def _read_xyz(lines: list[str], name: str) -> NDArray:
    rows = []
    width = None
    for i, raw in enumerate(lines, start=1):
        s = raw.strip()
        if not s or s.startswith("#"):
            continue
        tok = s.replace(",", " ").split()
        vals = _parse_floats(tok, 2, f"{name}:{i}")
        if width is None:
            width = len(vals)
            if width not in (2, 3):
                raise CloudFormatError(f"{name}:{i}: expected 2 or 3 columns, found {width}")
        elif len(vals) != width:
            raise CloudFormatError(f"{name}:{i}: expected {width} columns, found {len(vals)}")
        rows.append(vals)
    return np.array(rows, dtype=float).reshape(-1, width or 3)


def load_cloud(source: str | Path) -> NDArray:
    """Read an ASCII PLY, ASCII PCD or headerless ``x,y,z`` CSV cloud.

    Only positions are kept; colour and other attributes are dropped.
    """
    path = Path(source)
    if not path.is_file():
        raise FileNotFoundError(f"cannot read cloud {path}")
    lines = path.read_text().splitlines()
    suffix = path.suffix.lower()
    if suffix == ".ply":
        pts = _read_ply(lines, str(path))
    elif suffix == ".pcd":
        pts = _read_pcd(lines, str(path))
    else:
        pts = _read_xyz(lines, str(path))
    if len(pts) < 4:
        raise CloudFormatError(f"{path}: need at least 4 points, found {len(pts)}")
    return pts


def save_cloud(points: ArrayLike, dest: str | Path) -> Path:
    """Write positions as ASCII PLY, ASCII PCD or CSV (by suffix).

    Values use ``repr`` formatting so reading back is bit-exact.
    """
    pts = np.asarray(points, dtype=float)
    path = Path(dest)
    body = "\n".join(" ".join(repr(float(v)) for v in row) for row in pts)
    suffix = path.suffix.lower()
    if suffix in (".ply", ".pcd") and (pts.ndim != 2 or pts.shape[1] != 3):
        raise ValueError(f"{path}: PLY and PCD output needs 3-D points")
    if suffix == ".ply":
        header = (
            "ply\nformat ascii 1.0\n"
            f"element vertex {len(pts)}\n"
            "property double x\nproperty double y\nproperty double z\nend_header\n"
        )
        path.write_text(header + body + "\n")
    elif suffix == ".pcd":
        header = (
            "# .PCD v0.7\nVERSION 0.7\nFIELDS x y z\nSIZE 8 8 8\nTYPE F F F\nCOUNT 1 1 1\n"
            f"WIDTH {len(pts)}\nHEIGHT 1\nVIEWPOINT 0 0 0 1 0 0 0\nPOINTS {len(pts)}\nDATA ascii\n"
        )
        path.write_text(header + body + "\n")
    else:
        path.write_text("\n".join(",".join(repr(float(v)) for v in row) for row in pts) + "\n")
    return path
