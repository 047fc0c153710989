"""Sample, manifest, and fold-plan I/O plus input standardization.

Reads the sample-directory format produced by the raster toolkit
(``meta.json`` + ``dsm.f32`` + ``ortho.pgm``) without importing it, so the
two packages stay coupled only through files on disk.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

SIGMA_DSM = 1.197
DSM_FACTOR = 2.0
MU_ORT = 0.449
SIGMA_ORT = 0.226


class DataError(ValueError):
    """Malformed or inconsistent sample data."""


@dataclass(frozen=True)
class Sample:
    """One training/validation sample: raw rasters plus label metadata."""

    sample_id: str
    subset_id: str
    dsm: np.ndarray     # (px, px) float32, meters MSL
    ortho: np.ndarray   # (px, px) uint8
    wse: float          # label, meters MSL
    dsm_mean: float     # mean of dsm, used for (de)standardization
    chainage: float


def standardize_dsm(dsm: np.ndarray, mean: float | None = None) -> np.ndarray:
    d = np.asarray(dsm, dtype=np.float64)
    mu = d.mean() if mean is None else mean
    return (d - mu) / (DSM_FACTOR * SIGMA_DSM)


def standardize_ortho(ortho: np.ndarray) -> np.ndarray:
    return (np.asarray(ortho, dtype=np.float64) / 255.0 - MU_ORT) / SIGMA_ORT


def standardize_target(wse: float, dsm_mean: float) -> float:
    return (wse - dsm_mean) / (DSM_FACTOR * SIGMA_DSM)


def destandardize_target(value: float, dsm_mean: float) -> float:
    return value * (DSM_FACTOR * SIGMA_DSM) + dsm_mean


def sample_input(sample: Sample) -> np.ndarray:
    """Stack the standardized DSM and orthophoto into a (2, px, px) array."""
    return np.stack([standardize_dsm(sample.dsm, sample.dsm_mean),
                     standardize_ortho(sample.ortho)]).astype(np.float32)


def _read_pgm(path: Path) -> np.ndarray:
    data = path.read_bytes()
    fields: list[bytes] = []
    pos = 0
    while len(fields) < 4:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        fields.append(data[start:pos])
    if fields[0] != b"P5":
        raise DataError(f"{path}: not a binary P5 PGM")
    width, height, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    if maxval != 255:
        raise DataError(f"{path}: expected maxval 255, got {maxval}")
    pixels = np.frombuffer(data[pos + 1:pos + 1 + width * height], dtype=np.uint8)
    if pixels.size != width * height:
        raise DataError(f"{path}: truncated pixel data")
    return pixels.reshape(height, width)


def read_sample(dir_path: str | Path, sample_id: str | None = None) -> Sample:
    d = Path(dir_path)
    meta = json.loads((d / "meta.json").read_text())
    raw = np.fromfile(d / "dsm.f32", dtype="<f4")
    side = math.isqrt(raw.size)
    if side * side != raw.size:
        raise DataError(f"{d}: dsm.f32 holds {raw.size} values, not a square")
    dsm = raw.reshape(side, side)
    ortho = _read_pgm(d / "ortho.pgm")
    if ortho.shape != dsm.shape:
        raise DataError(f"{d}: ortho {ortho.shape} does not match dsm {dsm.shape}")
    return Sample(
        sample_id=sample_id if sample_id is not None else d.name,
        subset_id=meta["subset_id"],
        dsm=dsm, ortho=ortho,
        wse=float(meta["wse_m"]),
        dsm_mean=float(meta["dsm_mean_m"]),
        chainage=float(meta["chainage_m"]))


def read_manifest(dataset_dir: str | Path) -> tuple[list[Sample], list[str]]:
    """Load every sample listed in ``manifest.json`` under ``dataset_dir``."""
    root = Path(dataset_dir)
    doc = json.loads((root / "manifest.json").read_text())
    samples = [read_sample(root / rel) for rel in doc["samples"]]
    return samples, list(doc["subsets"])


def read_fold_plan(path: str | Path) -> list[dict]:
    doc = json.loads(Path(path).read_text())
    return doc["folds"]


def augment_arrays(arr: np.ndarray) -> list[np.ndarray]:
    """The 16 rotation/flip permutations (4 rotations x 4 flip modes) of a
    2-D or channel-first 3-D array, in a fixed deterministic order."""
    axes = (-2, -1)
    out = []
    for k in range(4):
        r = np.rot90(arr, k, axes=axes)
        out.extend([r, np.flip(r, axis=-1), np.flip(r, axis=-2),
                    np.flip(np.flip(r, axis=-1), axis=-2)])
    return [np.ascontiguousarray(v) for v in out]
