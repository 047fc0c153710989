"""Machine-learning dataset construction: sample records, standardization,
range filtering, dihedral augmentation, and the on-disk sample format.

A sample directory holds ``meta.json``, ``dsm.f32`` (65536 little-endian
float32, row-major, north row first) and ``ortho.pgm`` (P5, 256x256).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import raster
from .errors import InsufficientDataError, IntegrityError, RasterFormatError

PATCH_PX = 256
META_NAME = "meta.json"
DSM_NAME = "dsm.f32"
ORTHO_NAME = "ortho.pgm"

META_KEYS = ("wse_m", "dsm_mean_m", "dsm_std_m", "dsm_min_m", "dsm_max_m",
             "centroid_lat", "centroid_lon", "chainage_m", "subset_id")


@dataclass(frozen=True)
class StandardizationParams:
    """Feature-scaling constants; defaults are the published dataset's DSM
    sigma and the ImageNet grayscale moments."""

    sigma_dsm: float = 1.197
    dsm_denominator_factor: float = 2.0
    mu_ort: float = 0.449
    sigma_ort: float = 0.226

    def __post_init__(self):
        for name in ("sigma_dsm", "dsm_denominator_factor", "mu_ort", "sigma_ort"):
            if not getattr(self, name) > 0:
                raise IntegrityError(f"{name} must be > 0")


@dataclass(frozen=True)
class SampleRecord:
    """One ML sample: 256x256 orthophoto + DSM, ground-truth WSE, metadata."""

    ortho: np.ndarray  # (256, 256) uint8
    dsm: np.ndarray  # (256, 256) float32, m MSL
    wse: float
    dsm_mean: float
    dsm_std: float
    dsm_min: float
    dsm_max: float
    centroid_lat: float
    centroid_lon: float
    chainage: float
    subset_id: str

    def __post_init__(self):
        ortho = np.ascontiguousarray(self.ortho, dtype=np.uint8)
        dsm = np.ascontiguousarray(self.dsm, dtype=np.float32)
        if ortho.shape != (PATCH_PX, PATCH_PX) or dsm.shape != (PATCH_PX, PATCH_PX):
            raise IntegrityError(
                f"arrays must be {PATCH_PX}x{PATCH_PX}, got {ortho.shape} / {dsm.shape}")
        ortho.setflags(write=False)
        dsm.setflags(write=False)
        object.__setattr__(self, "ortho", ortho)
        object.__setattr__(self, "dsm", dsm)
        self.verify_stats(tol=1e-4)

    def verify_stats(self, tol: float = 1e-4) -> None:
        d = self.dsm.astype(np.float64)
        checks = {
            "dsm_mean_m": (self.dsm_mean, d.mean()),
            "dsm_std_m": (self.dsm_std, d.std()),
            "dsm_min_m": (self.dsm_min, d.min()),
            "dsm_max_m": (self.dsm_max, d.max()),
        }
        for key, (stored, actual) in checks.items():
            if abs(stored - actual) > tol:
                raise IntegrityError(
                    f"metadata {key}={stored} disagrees with array value {actual}")


def make_sample(ortho: np.ndarray, dsm: np.ndarray, wse: float, centroid_lat: float,
                centroid_lon: float, chainage: float, subset_id: str) -> SampleRecord:
    """Build a record with DSM statistics computed from the array."""
    d = np.ascontiguousarray(dsm, dtype=np.float32).astype(np.float64)
    return SampleRecord(
        ortho=ortho, dsm=dsm, wse=float(wse),
        dsm_mean=float(d.mean()), dsm_std=float(d.std()),
        dsm_min=float(d.min()), dsm_max=float(d.max()),
        centroid_lat=float(centroid_lat), centroid_lon=float(centroid_lon),
        chainage=float(chainage), subset_id=str(subset_id))


def standardize_dsm(dsm: np.ndarray, params: StandardizationParams = StandardizationParams()
                    ) -> np.ndarray:
    """(dsm - mean(dsm)) / (factor * sigma); zero-mean output regardless of
    absolute altitude."""
    d = np.asarray(dsm, dtype=np.float64)
    return (d - d.mean()) / (params.dsm_denominator_factor * params.sigma_dsm)


def destandardize_dsm(std_dsm: np.ndarray, original_mean: float,
                      params: StandardizationParams = StandardizationParams()) -> np.ndarray:
    return np.asarray(std_dsm, dtype=np.float64) * (
        params.dsm_denominator_factor * params.sigma_dsm) + original_mean


def standardize_ortho(ortho: np.ndarray,
                      params: StandardizationParams = StandardizationParams()) -> np.ndarray:
    """Scale 0-255 grayscale to [0, 1] then standardize with the grayscale
    ImageNet moments."""
    o = np.asarray(ortho, dtype=np.float64)
    return (o / 255.0 - params.mu_ort) / params.sigma_ort


def range_filter(sample: SampleRecord, threshold: float = 4.5) -> bool:
    """Keep only samples whose DSM elevation range is strictly below the
    threshold (discards patches dominated by tall trees)."""
    return (sample.dsm_max - sample.dsm_min) < threshold


def _variants(arr: np.ndarray, dedupe: bool):
    # rot x flip cross product, row-major over (rotation, flip) with flips
    # ordered none, x, y, both. 16 variants; only 8 are distinct.
    # Deduped form keeps one representative per dihedral-group element:
    # the 4 rotations and the 4 rotation-composed-with-x-flip variants.
    out = []
    for k in range(4):
        rot = np.rot90(arr, k)
        if dedupe:
            out.extend([rot, rot[:, ::-1]])
        else:
            out.extend([rot, rot[:, ::-1], rot[::-1, :], rot[::-1, ::-1]])
    return out


def augment(sample: SampleRecord, dedupe: bool = False) -> list[SampleRecord]:
    """All rotation/flip permutations of the sample's arrays, applied
    identically to ortho and DSM; metadata is unchanged.

    Emits 16 variants by default (the 4 rotations x 4 flips cross product,
    which double-counts the 8 dihedral symmetries); ``dedupe=True`` keeps
    only the distinct 8.
    """
    orthos = _variants(sample.ortho, dedupe)
    dsms = _variants(sample.dsm, dedupe)
    return [replace(sample, ortho=np.ascontiguousarray(o), dsm=np.ascontiguousarray(d))
            for o, d in zip(orthos, dsms)]


def compute_global_sigma(samples: list[SampleRecord]) -> float:
    """Population standard deviation over all DSM pixels of all samples."""
    if not samples:
        raise InsufficientDataError("compute_global_sigma needs >= 1 sample")
    total_n = 0
    total_sum = 0.0
    total_sq = 0.0
    for s in samples:
        d = s.dsm.astype(np.float64)
        total_n += d.size
        total_sum += d.sum()
        total_sq += np.sum(d * d)
    mean = total_sum / total_n
    var = total_sq / total_n - mean * mean
    return float(np.sqrt(max(var, 0.0)))


def write_sample(sample: SampleRecord, dir_path: str | Path) -> None:
    d = Path(dir_path)
    d.mkdir(parents=True, exist_ok=True)
    meta = {
        "wse_m": sample.wse,
        "dsm_mean_m": sample.dsm_mean,
        "dsm_std_m": sample.dsm_std,
        "dsm_min_m": sample.dsm_min,
        "dsm_max_m": sample.dsm_max,
        "centroid_lat": sample.centroid_lat,
        "centroid_lon": sample.centroid_lon,
        "chainage_m": sample.chainage,
        "subset_id": sample.subset_id,
    }
    (d / META_NAME).write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    (d / DSM_NAME).write_bytes(sample.dsm.astype("<f4").tobytes())
    raster.write_pgm(sample.ortho, d / ORTHO_NAME)


def read_sample(dir_path: str | Path) -> SampleRecord:
    d = Path(dir_path)
    for name in (META_NAME, DSM_NAME, ORTHO_NAME):
        if not (d / name).is_file():
            raise RasterFormatError(f"sample directory {d} is missing {name}")
    try:
        meta = json.loads((d / META_NAME).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise RasterFormatError(f"corrupt {META_NAME} in {d}: {e}")
    missing = [k for k in META_KEYS if k not in meta]
    if missing:
        raise RasterFormatError(f"{META_NAME} in {d} is missing keys {missing}")
    raw = (d / DSM_NAME).read_bytes()
    if len(raw) != PATCH_PX * PATCH_PX * 4:
        raise RasterFormatError(
            f"{DSM_NAME} in {d} has {len(raw)} bytes, expected {PATCH_PX * PATCH_PX * 4}")
    dsm = np.frombuffer(raw, dtype="<f4").reshape(PATCH_PX, PATCH_PX)
    ortho = raster._read_pgm(d / ORTHO_NAME)
    if ortho.shape != (PATCH_PX, PATCH_PX):
        raise RasterFormatError(f"{ORTHO_NAME} in {d} is {ortho.shape}, expected 256x256")
    return SampleRecord(
        ortho=ortho, dsm=dsm, wse=float(meta["wse_m"]),
        dsm_mean=float(meta["dsm_mean_m"]), dsm_std=float(meta["dsm_std_m"]),
        dsm_min=float(meta["dsm_min_m"]), dsm_max=float(meta["dsm_max_m"]),
        centroid_lat=float(meta["centroid_lat"]), centroid_lon=float(meta["centroid_lon"]),
        chainage=float(meta["chainage_m"]), subset_id=str(meta["subset_id"]))


def write_manifest(sample_dirs: list[str], subsets: list[str], path: str | Path) -> None:
    doc = {"samples": list(sample_dirs), "subsets": list(subsets)}
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def read_manifest(path: str | Path) -> dict:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if "samples" not in doc or "subsets" not in doc:
        raise RasterFormatError(f"manifest {path} must contain 'samples' and 'subsets'")
    return doc
