"""Georeferenced raster grids: ESRI ASCII / PGM ingestion, bilinear sampling,
and patch extraction.

Coordinates are planar projected meters. A grid's transform anchors the
outer corner of pixel (0, 0) at (origin_x, origin_y); rows advance toward
decreasing northing (row 0 is the northernmost).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import NodataError, OutOfBoundsError, RasterFormatError

ASCII_HEADER_KEYS = ("ncols", "nrows", "xllcorner", "yllcorner", "cellsize", "nodata_value")


@dataclass(frozen=True)
class GeoTransform:
    """Affine georeference for a north-up grid with square pixels."""

    origin_x: float  # easting of the outer corner of pixel (0, 0)
    origin_y: float  # northing of the same corner
    pixel_size: float  # meters per pixel, > 0

    def __post_init__(self):
        if not self.pixel_size > 0:
            raise RasterFormatError(f"pixel_size must be > 0, got {self.pixel_size}")

    def pixel_corner_to_world(self, col: float, row: float) -> tuple[float, float]:
        return (self.origin_x + col * self.pixel_size,
                self.origin_y - row * self.pixel_size)

    def world_to_pixel_corner(self, x: float, y: float) -> tuple[float, float]:
        return ((x - self.origin_x) / self.pixel_size,
                (self.origin_y - y) / self.pixel_size)

    def pixel_center_to_world(self, col: float, row: float) -> tuple[float, float]:
        return self.pixel_corner_to_world(col + 0.5, row + 0.5)

    def world_to_pixel_center(self, x: float, y: float) -> tuple[float, float]:
        col, row = self.world_to_pixel_corner(x, y)
        return col - 0.5, row - 0.5


@dataclass(frozen=True)
class Grid:
    """Immutable 2-D raster with georeference and a nodata sentinel.

    ``values`` is (height, width), row 0 northernmost. DSM grids hold real
    elevations in m MSL; orthophoto grids hold integers 0-255.
    """

    values: np.ndarray
    transform: GeoTransform
    nodata: float | None = None

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 2 or v.shape[0] < 2 or v.shape[1] < 2:
            raise RasterFormatError(f"grid must be at least 2x2, got shape {v.shape}")
        v = np.ascontiguousarray(v)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    def nodata_mask(self) -> np.ndarray:
        if self.nodata is None:
            return np.zeros(self.values.shape, dtype=bool)
        return self.values == self.nodata


def load_dsm_ascii(path: str | Path) -> Grid:
    """Read an ESRI ASCII grid (.asc). Header keys are case-insensitive."""
    text = Path(path).read_text()
    lines = text.splitlines()
    header: dict[str, float] = {}
    body_start = 0
    for i, line in enumerate(lines):
        parts = line.split()
        if len(parts) == 2 and re.fullmatch(r"[A-Za-z_]+", parts[0]):
            key = parts[0].lower()
            try:
                header[key] = float(parts[1])
            except ValueError:
                raise RasterFormatError(f"unparseable header value for key '{parts[0]}'")
            body_start = i + 1
        else:
            break
    for key in ("ncols", "nrows", "xllcorner", "yllcorner", "cellsize"):
        if key not in header:
            raise RasterFormatError(f"missing required header key '{key}'")
    ncols = int(header["ncols"])
    nrows = int(header["nrows"])
    if ncols != header["ncols"] or nrows != header["nrows"] or ncols < 1 or nrows < 1:
        raise RasterFormatError("ncols/nrows must be positive integers")
    cellsize = header["cellsize"]
    if not cellsize > 0:
        raise RasterFormatError("cellsize must be > 0")
    nodata = header.get("nodata_value")

    tokens = " ".join(lines[body_start:]).split()
    try:
        flat = np.array(tokens, dtype=float)
    except ValueError:
        raise RasterFormatError("unparseable grid values")
    if flat.size != ncols * nrows:
        raise RasterFormatError(
            f"expected {ncols * nrows} values ({ncols}x{nrows}), found {flat.size}")
    values = flat.reshape(nrows, ncols)
    transform = GeoTransform(
        origin_x=header["xllcorner"],
        origin_y=header["yllcorner"] + nrows * cellsize,
        pixel_size=cellsize,
    )
    return Grid(values=values, transform=transform, nodata=nodata)


def write_dsm_ascii(grid: Grid, path: str | Path) -> None:
    """Write a grid as an ESRI ASCII file (round-trip oracle for the reader)."""
    t = grid.transform
    lines = [
        f"ncols {grid.width}",
        f"nrows {grid.height}",
        f"xllcorner {t.origin_x!r}",
        f"yllcorner {t.origin_y - grid.height * t.pixel_size!r}",
        f"cellsize {t.pixel_size!r}",
    ]
    if grid.nodata is not None:
        lines.append(f"NODATA_value {grid.nodata!r}")
    for row in grid.values:
        lines.append(" ".join(repr(float(v)) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def _read_pgm(path: str | Path) -> np.ndarray:
    data = Path(path).read_bytes()
    # Header: magic, width, height, maxval as whitespace-separated tokens,
    # possibly interleaved with '#' comment lines.
    tokens = []
    pos = 0
    while len(tokens) < 4:
        if pos >= len(data):
            raise RasterFormatError("truncated PGM header")
        c = data[pos:pos + 1]
        if c.isspace():
            pos += 1
        elif c == b"#":
            nl = data.find(b"\n", pos)
            pos = len(data) if nl < 0 else nl + 1
        else:
            end = pos
            while end < len(data) and not data[end:end + 1].isspace():
                end += 1
            tokens.append(data[pos:end])
            pos = end
    if tokens[0] != b"P5":
        raise RasterFormatError(f"unsupported PGM magic {tokens[0]!r} (need P5)")
    try:
        width, height, maxval = (int(t) for t in tokens[1:4])
    except ValueError:
        raise RasterFormatError("non-integer PGM dimensions")
    if maxval != 255:
        raise RasterFormatError(f"unsupported PGM maxval {maxval} (need 255)")
    pos += 1  # single whitespace byte after maxval
    raster = data[pos:pos + width * height]
    if len(raster) != width * height:
        raise RasterFormatError(
            f"expected {width * height} raster bytes, found {len(raster)}")
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width).copy()


def write_pgm(values: np.ndarray, path: str | Path) -> None:
    """Write an integer 0-255 array as binary P5 PGM."""
    v = np.asarray(values)
    if v.ndim != 2:
        raise RasterFormatError("PGM values must be 2-D")
    if v.min() < 0 or v.max() > 255:
        raise RasterFormatError("PGM values must lie in [0, 255]")
    header = f"P5\n{v.shape[1]} {v.shape[0]}\n255\n".encode()
    Path(path).write_bytes(header + v.astype(np.uint8).tobytes())


def load_ortho_pgm(path: str | Path, worldfile: str | Path) -> Grid:
    """Read a grayscale orthophoto (binary P5 PGM) with its ESRI world file.

    The world file gives the pixel size, two rotation terms (must be zero),
    the negative y pixel size, and the world coordinates of the CENTER of
    the top-left pixel; the returned transform uses the corner convention.
    """
    values = _read_pgm(path)
    wf_lines = Path(worldfile).read_text().split()
    if len(wf_lines) < 6:
        raise RasterFormatError("world file must contain 6 numbers")
    try:
        a, d, b, e, cx, cy = (float(s) for s in wf_lines[:6])
    except ValueError:
        raise RasterFormatError("unparseable world file value")
    if d != 0.0 or b != 0.0:
        raise RasterFormatError(f"rotated rasters are unsupported (rotation terms {d}, {b})")
    if not a > 0 or not e < 0:
        raise RasterFormatError("world file pixel sizes must be +x, -y")
    if not math.isclose(a, -e, rel_tol=1e-9):
        raise RasterFormatError("non-square pixels are unsupported")
    transform = GeoTransform(origin_x=cx - a / 2, origin_y=cy + a / 2, pixel_size=a)
    return Grid(values=values, transform=transform, nodata=None)


def write_worldfile(transform: GeoTransform, path: str | Path) -> None:
    p = transform.pixel_size
    cx, cy = transform.pixel_center_to_world(0, 0)
    Path(path).write_text(f"{p!r}\n0.0\n0.0\n{-p!r}\n{cx!r}\n{cy!r}\n")


def sample_bilinear(grid: Grid, x: float, y: float) -> float:
    """Bilinear interpolation at world point (x, y).

    The point must lie inside the convex hull of pixel centers; reaching a
    nodata neighbor raises instead of silently filling.
    """
    col, row = grid.transform.world_to_pixel_center(x, y)
    if not (0.0 <= col <= grid.width - 1 and 0.0 <= row <= grid.height - 1):
        raise OutOfBoundsError(
            f"point ({x}, {y}) outside pixel-center hull (fractional index {col}, {row})")
    c0 = min(int(math.floor(col)), grid.width - 2)
    r0 = min(int(math.floor(row)), grid.height - 2)
    fc = col - c0
    fr = row - r0
    quad = grid.values[r0:r0 + 2, c0:c0 + 2].astype(float)
    if grid.nodata is not None and np.any(quad == grid.nodata):
        raise NodataError(f"nodata neighbor at ({x}, {y})")
    top = quad[0, 0] * (1 - fc) + quad[0, 1] * fc
    bot = quad[1, 0] * (1 - fc) + quad[1, 1] * fc
    return float(top * (1 - fr) + bot * fr)


def sample_bilinear_many(grid: Grid, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Vectorized bilinear sampling. Out-of-hull or nodata-touching points
    come back as NaN; callers decide whether that is an error."""
    cols = (np.asarray(xs, float) - grid.transform.origin_x) / grid.transform.pixel_size - 0.5
    rows = (grid.transform.origin_y - np.asarray(ys, float)) / grid.transform.pixel_size - 0.5
    ok = (cols >= 0) & (cols <= grid.width - 1) & (rows >= 0) & (rows <= grid.height - 1)
    c0 = np.clip(np.floor(cols).astype(int), 0, grid.width - 2)
    r0 = np.clip(np.floor(rows).astype(int), 0, grid.height - 2)
    fc = cols - c0
    fr = rows - r0
    v = grid.values.astype(float)
    q00 = v[r0, c0]
    q01 = v[r0, c0 + 1]
    q10 = v[r0 + 1, c0]
    q11 = v[r0 + 1, c0 + 1]
    out = (q00 * (1 - fc) + q01 * fc) * (1 - fr) + (q10 * (1 - fc) + q11 * fc) * fr
    if grid.nodata is not None:
        nd = grid.nodata
        touches = (q00 == nd) | (q01 == nd) | (q10 == nd) | (q11 == nd)
        ok = ok & ~touches
    out = np.where(ok, out, np.nan)
    return out


def extract_patch(grid: Grid, center_x: float, center_y: float,
                  side: float = 10.0, out_px: int = 256) -> Grid:
    """Resample a side x side meter square centered at (center_x, center_y)
    into an out_px x out_px grid by bilinear sampling."""
    if not side > 0 or out_px < 2:
        raise OutOfBoundsError(f"invalid patch request side={side}, out_px={out_px}")
    pitch = side / out_px
    half = side / 2
    # Output pixel centers span the square uniformly.
    xs = center_x - half + (np.arange(out_px) + 0.5) * pitch
    ys = center_y + half - (np.arange(out_px) + 0.5) * pitch
    xx, yy = np.meshgrid(xs, ys)
    values = sample_bilinear_many(grid, xx.ravel(), yy.ravel()).reshape(out_px, out_px)
    if np.any(np.isnan(values)):
        raise OutOfBoundsError(
            f"patch at ({center_x}, {center_y}) side {side} exceeds raster bounds "
            "or touches nodata")
    transform = GeoTransform(origin_x=center_x - half, origin_y=center_y + half,
                             pixel_size=pitch)
    return Grid(values=values, transform=transform, nodata=None)
