"""Least-squares fitting along chainage: simple linear fits, piecewise
polynomial fits with breakpoints, prediction, and the standard error of
estimate."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InsufficientDataError, UnderdeterminedError


@dataclass(frozen=True)
class LinearFit:
    """y = a * x + b fitted by ordinary least squares."""

    a: float
    b: float
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise UnderdeterminedError(f"linear fit needs n >= 2, got {self.n}")
        if not (np.isfinite(self.a) and np.isfinite(self.b)):
            raise UnderdeterminedError("non-finite linear fit coefficients")


@dataclass(frozen=True)
class PolySegment:
    """One polynomial piece over [lo, hi) in the original x units.

    Coefficients are in a conditioned basis u = (x - shift) / scale,
    ascending order (c0 + c1*u + c2*u^2 + ...).
    """

    lo: float
    hi: float
    coeffs: tuple[float, ...]
    shift: float
    scale: float

    def eval(self, x: np.ndarray) -> np.ndarray:
        u = (np.asarray(x, float) - self.shift) / self.scale
        return np.polynomial.polynomial.polyval(u, np.asarray(self.coeffs))


@dataclass(frozen=True)
class PiecewisePolyFit:
    """Independent per-segment polynomial fits partitioning the x range.

    Segments are half-open [lo, hi); the final segment is closed at its
    right edge. Evaluation outside the fitted range uses the nearest
    segment (extrapolation, flagged by ``predict(..., return_flag=True)``).
    """

    segments: tuple[PolySegment, ...]
    degree: int
    breakpoints: tuple[float, ...]
    n: int

    @property
    def x_min(self) -> float:
        return self.segments[0].lo

    @property
    def x_max(self) -> float:
        return self.segments[-1].hi

    def segment_for(self, x: float) -> PolySegment:
        for seg in self.segments[:-1]:
            if x < seg.hi:
                return seg
        return self.segments[-1]


def ols_fit(points) -> LinearFit:
    """Ordinary least squares line through (x, y) points."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
        raise UnderdeterminedError(f"need >= 2 (x, y) points, got shape {pts.shape}")
    x = pts[:, 0]
    y = pts[:, 1]
    xm = x.mean()
    ym = y.mean()
    sxx = np.sum((x - xm) ** 2)
    if sxx == 0:
        raise UnderdeterminedError("all x values equal; slope is undefined")
    a = float(np.sum((x - xm) * (y - ym)) / sxx)
    b = float(ym - a * xm)
    return LinearFit(a=a, b=b, n=len(x))


def poly_fit(points, degree: int, breakpoints=()) -> PiecewisePolyFit:
    """Per-segment least-squares polynomial fit; breakpoints split the x
    range into independently fitted pieces."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise UnderdeterminedError(f"need (x, y) points, got shape {pts.shape}")
    if degree < 0:
        raise UnderdeterminedError(f"degree must be >= 0, got {degree}")
    x = pts[:, 0]
    y = pts[:, 1]
    bps = sorted(float(b) for b in breakpoints)
    edges = [-np.inf] + bps + [np.inf]
    segments = []
    for si in range(len(edges) - 1):
        lo_e, hi_e = edges[si], edges[si + 1]
        last = si == len(edges) - 2
        mask = (x >= lo_e) & ((x <= hi_e) if last else (x < hi_e))
        if mask.sum() < degree + 2:
            raise UnderdeterminedError(
                f"segment [{lo_e}, {hi_e}) has {int(mask.sum())} points, "
                f"needs >= {degree + 2} for degree {degree}")
        xs = x[mask]
        ys = y[mask]
        lo = float(xs.min()) if not np.isfinite(lo_e) else float(lo_e)
        hi = float(xs.max()) if not np.isfinite(hi_e) else float(hi_e)
        # Condition by mapping the segment's data range onto [-1, 1].
        shift = float((xs.min() + xs.max()) / 2)
        scale = float((xs.max() - xs.min()) / 2) or 1.0
        u = (xs - shift) / scale
        coeffs = np.polynomial.polynomial.polyfit(u, ys, degree)
        segments.append(PolySegment(lo=lo, hi=hi, coeffs=tuple(float(c) for c in coeffs),
                                    shift=shift, scale=scale))
    return PiecewisePolyFit(segments=tuple(segments), degree=degree,
                            breakpoints=tuple(bps), n=len(x))


def predict(fit, x, return_flag: bool = False):
    """Evaluate a LinearFit or PiecewisePolyFit at x (scalar or array).

    With ``return_flag=True`` also returns whether any evaluation point lay
    outside the fitted range (piecewise extrapolation by nearest segment).
    """
    xs = np.asarray(x, dtype=float)
    if isinstance(fit, LinearFit):
        out = fit.a * xs + fit.b
        flag = False
    elif isinstance(fit, PiecewisePolyFit):
        flat = np.atleast_1d(xs).ravel()
        out = np.array([fit.segment_for(v).eval(v) for v in flat]).reshape(np.atleast_1d(xs).shape)
        out = out if xs.ndim else float(out.ravel()[0])
        flag = bool(np.any((flat < fit.x_min) | (flat > fit.x_max)))
    else:
        raise TypeError(f"unsupported fit type {type(fit).__name__}")
    if xs.ndim == 0:
        out = float(out)
    if return_flag:
        return out, flag
    return out


def std_error_estimate(points, fit) -> float:
    """Standard error of estimate: sqrt(sum(residual^2) / (n - 2)).

    The n-2 denominator is used for every fit degree by convention of the
    ground-truth accuracy metric this implements.
    """
    pts = np.asarray(points, dtype=float)
    n = pts.shape[0]
    if n <= 2:
        raise InsufficientDataError(f"standard error of estimate needs n > 2, got {n}")
    residuals = pts[:, 1] - np.asarray(predict(fit, pts[:, 0]))
    return float(np.sqrt(np.sum(residuals ** 2) / (n - 2)))


def fit_to_json(fit, s_e: float | None = None) -> dict:
    """Serialize a fit to the shared JSON schema."""
    if isinstance(fit, LinearFit):
        return {
            "type": "linear",
            "degree": 1,
            "breakpoints": [],
            "segments": [{"range": None, "coeffs": [fit.b, fit.a], "x_affine": [0.0, 1.0]}],
            "n": fit.n,
            "s_e": s_e,
        }
    if isinstance(fit, PiecewisePolyFit):
        return {
            "type": "piecewise",
            "degree": fit.degree,
            "breakpoints": list(fit.breakpoints),
            "segments": [
                {"range": [seg.lo, seg.hi], "coeffs": list(seg.coeffs),
                 "x_affine": [seg.shift, seg.scale]}
                for seg in fit.segments
            ],
            "n": fit.n,
            "s_e": s_e,
        }
    raise TypeError(f"unsupported fit type {type(fit).__name__}")


def fit_from_json(doc: dict):
    if doc.get("type") == "linear":
        seg = doc["segments"][0]
        return LinearFit(a=float(seg["coeffs"][1]), b=float(seg["coeffs"][0]),
                         n=int(doc["n"]))
    if doc.get("type") == "piecewise":
        segments = tuple(
            PolySegment(lo=float(s["range"][0]), hi=float(s["range"][1]),
                        coeffs=tuple(float(c) for c in s["coeffs"]),
                        shift=float(s["x_affine"][0]), scale=float(s["x_affine"][1]))
            for s in doc["segments"])
        return PiecewisePolyFit(segments=segments, degree=int(doc["degree"]),
                                breakpoints=tuple(float(b) for b in doc["breakpoints"]),
                                n=int(doc["n"]))
    raise ValueError(f"unknown fit type {doc.get('type')!r}")


def save_fit_json(fit, path: str | Path, s_e: float | None = None) -> None:
    Path(path).write_text(json.dumps(fit_to_json(fit, s_e), indent=2) + "\n")


def load_fit_json(path: str | Path):
    return fit_from_json(json.loads(Path(path).read_text()))
