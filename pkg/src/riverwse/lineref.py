"""Polylines with linear referencing: chainage computation, densification,
nearest-point projection, and clipping to axis-aligned boxes."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import GeometryError


@dataclass(frozen=True)
class Polyline:
    """Ordered planar polyline in projected meters."""

    vertices: np.ndarray  # (n, 2), n >= 2
    _cum: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 2:
            raise GeometryError(f"polyline needs an (n>=2, 2) vertex array, got {v.shape}")
        seg = np.hypot(*(v[1:] - v[:-1]).T)
        if np.any(seg == 0):
            raise GeometryError("consecutive polyline vertices must be distinct")
        v.setflags(write=False)
        cum = np.concatenate([[0.0], np.cumsum(seg)])
        cum.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "_cum", cum)

    @property
    def length(self) -> float:
        return float(self._cum[-1])

    @property
    def vertex_chainages(self) -> np.ndarray:
        return self._cum

    def point_at(self, chainage: float) -> tuple[float, float]:
        """World coordinates of the point at the given chainage (clamped to
        [0, length])."""
        c = min(max(chainage, 0.0), self.length)
        i = int(np.searchsorted(self._cum, c, side="right") - 1)
        i = min(i, len(self._cum) - 2)
        seg_len = self._cum[i + 1] - self._cum[i]
        t = (c - self._cum[i]) / seg_len
        p = self.vertices[i] * (1 - t) + self.vertices[i + 1] * t
        return float(p[0]), float(p[1])

    def points_at(self, chainages: np.ndarray) -> np.ndarray:
        c = np.clip(np.asarray(chainages, float), 0.0, self.length)
        i = np.clip(np.searchsorted(self._cum, c, side="right") - 1, 0, len(self._cum) - 2)
        t = (c - self._cum[i]) / (self._cum[i + 1] - self._cum[i])
        return self.vertices[i] * (1 - t)[:, None] + self.vertices[i + 1] * t[:, None]


@dataclass(frozen=True)
class ChainagePoint:
    chainage: float
    x: float
    y: float


def densify(line: Polyline, step: float = 0.1) -> list[ChainagePoint]:
    """Points at chainages 0, step, 2*step, ... plus the final vertex."""
    if not step > 0:
        raise GeometryError(f"step must be > 0, got {step}")
    chain = np.arange(0.0, line.length, step)
    # Append the final vertex unless the last multiple already landed on it.
    if line.length - chain[-1] > 1e-12 * max(1.0, line.length):
        chain = np.append(chain, line.length)
    else:
        chain[-1] = line.length
    pts = line.points_at(chain)
    return [ChainagePoint(float(c), float(p[0]), float(p[1])) for c, p in zip(chain, pts)]


def densify_chainages(line: Polyline, step: float = 0.1) -> np.ndarray:
    return np.array([p.chainage for p in densify(line, step)])


def project_chainage(line: Polyline, x: float, y: float) -> float:
    """Chainage of the closest point on the polyline to (x, y); ties go to
    the smallest chainage."""
    p = np.array([x, y], dtype=float)
    a = line.vertices[:-1]
    b = line.vertices[1:]
    ab = b - a
    seg_len2 = np.einsum("ij,ij->i", ab, ab)
    t = np.clip(np.einsum("ij,ij->i", p - a, ab) / seg_len2, 0.0, 1.0)
    foot = a + t[:, None] * ab
    d2 = np.einsum("ij,ij->i", foot - p, foot - p)
    chain = line._cum[:-1] + t * np.sqrt(seg_len2)
    best_d2 = d2.min()
    candidates = chain[d2 <= best_d2 + 1e-12 * max(1.0, best_d2)]
    return float(candidates.min())


def _clip_segment_to_box(p0, p1, box) -> tuple[float, float] | None:
    """Liang-Barsky: parameter interval [t0, t1] of p0->p1 inside the box,
    or None when the segment misses it."""
    xmin, ymin, xmax, ymax = box
    d = p1 - p0
    t0, t1 = 0.0, 1.0
    for num, den in (
        (xmin - p0[0], d[0]),
        (p0[0] - xmax, -d[0]),
        (ymin - p0[1], d[1]),
        (p0[1] - ymax, -d[1]),
    ):
        if den == 0:
            if num > 0:
                return None
            continue
        t = num / den
        if den > 0:
            t0 = max(t0, t)
        else:
            t1 = min(t1, t)
        if t0 > t1:
            return None
    return t0, t1


def clip_chainage_range(line: Polyline, box: tuple[float, float, float, float]
                        ) -> tuple[float, float]:
    """Chainage interval of the portion of the line inside an axis-aligned
    box (xmin, ymin, xmax, ymax)."""
    xmin, ymin, xmax, ymax = box
    if xmin > xmax or ymin > ymax:
        raise GeometryError(f"invalid box {box}")
    c_lo = np.inf
    c_hi = -np.inf
    for i in range(len(line.vertices) - 1):
        res = _clip_segment_to_box(line.vertices[i], line.vertices[i + 1],
                                   (xmin, ymin, xmax, ymax))
        if res is None:
            continue
        t0, t1 = res
        seg_len = line._cum[i + 1] - line._cum[i]
        c_lo = min(c_lo, line._cum[i] + t0 * seg_len)
        c_hi = max(c_hi, line._cum[i] + t1 * seg_len)
    if not np.isfinite(c_lo):
        raise GeometryError("polyline does not intersect the box")
    return float(c_lo), float(c_hi)


def load_polyline_csv(path: str | Path) -> Polyline:
    """Read a polyline from CSV with header ``x,y``."""
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None or [s.strip() for s in reader.fieldnames[:2]] != ["x", "y"]:
            raise GeometryError(f"polyline CSV must have header 'x,y', got {reader.fieldnames}")
        verts = [(float(row["x"]), float(row["y"])) for row in reader]
    return Polyline(np.array(verts))


def save_polyline_csv(line: Polyline, path: str | Path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["x", "y"])
        for vx, vy in line.vertices:
            w.writerow([repr(float(vx)), repr(float(vy))])
