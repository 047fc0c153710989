"""Exponentially weighted moving statistics over chainage-ordered series:
forward/backward EWMA, their average (FBEWMA), iterative outlier rejection,
and the forward-backward moving standard deviation (FBEWMSD)."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateSeriesError, GeometryError, InsufficientDataError

FORWARD = "forward"
BACKWARD = "backward"


@dataclass(frozen=True)
class ChainageSeries:
    """Ordered (chainage, value) samples with strictly increasing chainage."""

    chainage: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.chainage, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if c.ndim != 1 or v.shape != c.shape:
            raise GeometryError("chainage and values must be equal-length 1-D arrays")
        if c.size and np.any(np.diff(c) <= 0):
            raise GeometryError("chainage must be strictly increasing")
        if not np.all(np.isfinite(v)) or not np.all(np.isfinite(c)):
            raise GeometryError("chainage series must be finite")
        c.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "chainage", c)
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return self.chainage.size

    def with_values(self, values: np.ndarray) -> "ChainageSeries":
        return ChainageSeries(self.chainage.copy(), values)

    def take(self, mask: np.ndarray) -> "ChainageSeries":
        return ChainageSeries(self.chainage[mask], self.values[mask])


@dataclass(frozen=True)
class FilterParams:
    """Outlier-rejection parameters; defaults follow the field-validated
    window 50 / 0.1 m / 3 iterations combination."""

    span: int = 50
    max_dev: float = 0.1
    iterations: int = 3

    def __post_init__(self):
        if self.span < 1:
            raise GeometryError(f"span must be >= 1, got {self.span}")
        if not self.max_dev > 0:
            raise GeometryError(f"max_dev must be > 0, got {self.max_dev}")
        if self.iterations < 1:
            raise GeometryError(f"iterations must be >= 1, got {self.iterations}")


def span_to_alpha(span: int) -> float:
    return 2.0 / (span + 1.0)


def _ewma_forward(x: np.ndarray, alpha: float, adjust: bool) -> np.ndarray:
    out = np.empty_like(x, dtype=float)
    decay = 1.0 - alpha
    if adjust:
        # y_t = sum_i (1-a)^i x_{t-i} / sum_i (1-a)^i via paired recurrences.
        num = 0.0
        den = 0.0
        for t in range(x.size):
            num = x[t] + decay * num
            den = 1.0 + decay * den
            out[t] = num / den
    else:
        y = x[0]
        out[0] = y
        for t in range(1, x.size):
            y = alpha * x[t] + decay * y
            out[t] = y
    return out


def ewma(series: ChainageSeries, span: int, direction: str = FORWARD,
         alpha: float | None = None, adjust: bool = True) -> ChainageSeries:
    """Exponentially weighted moving average along the sample index.

    ``span`` maps to alpha = 2/(span+1); pass ``alpha`` to override the
    mapping. ``adjust=True`` uses finite-window-normalized weights,
    ``adjust=False`` the plain recursive form y_t = a*x_t + (1-a)*y_{t-1}.
    """
    if len(series) == 0:
        raise InsufficientDataError("ewma of empty series")
    if alpha is None:
        if span < 1:
            raise GeometryError(f"span must be >= 1, got {span}")
        alpha = span_to_alpha(span)
    if not 0 < alpha <= 1:
        raise GeometryError(f"alpha must be in (0, 1], got {alpha}")
    x = series.values
    if direction == FORWARD:
        out = _ewma_forward(x, alpha, adjust)
    elif direction == BACKWARD:
        out = _ewma_forward(x[::-1], alpha, adjust)[::-1]
    else:
        raise GeometryError(f"direction must be 'forward' or 'backward', got {direction!r}")
    return series.with_values(out)


def fbewma(series: ChainageSeries, span: int, alpha: float | None = None,
           adjust: bool = True) -> ChainageSeries:
    """Pointwise mean of the forward and backward EWMA passes."""
    fwd = ewma(series, span, FORWARD, alpha=alpha, adjust=adjust)
    bwd = ewma(series, span, BACKWARD, alpha=alpha, adjust=adjust)
    return series.with_values((fwd.values + bwd.values) / 2.0)


def reject_outliers(series: ChainageSeries, params: FilterParams = FilterParams(),
                    adjust: bool = True) -> tuple[ChainageSeries, ChainageSeries]:
    """Iteratively reject points deviating from the survivors' FBEWMA by more
    than ``max_dev``. Returns (kept, removed); their union is the input.

    Each iteration recomputes the FBEWMA on the current kept set and then
    re-selects from the full input against it (interpolated over chainage),
    so points shadowed by a spike-inflated early average are recovered once
    the spikes are gone.
    """
    if len(series) == 0:
        raise InsufficientDataError("reject_outliers of empty series")
    keep = np.ones(len(series), dtype=bool)
    for _ in range(params.iterations):
        kept = series.take(keep)
        smooth = fbewma(kept, params.span, adjust=adjust)
        baseline = np.interp(series.chainage, smooth.chainage, smooth.values)
        new_keep = np.abs(series.values - baseline) <= params.max_dev
        if not new_keep.any():
            raise DegenerateSeriesError(
                "all points rejected; the edge line gives no usable surface")
        if np.array_equal(new_keep, keep):
            break
        keep = new_keep
    return series.take(keep), series.take(~keep)


def fbewmsd(series: ChainageSeries, window: int, alpha: float | None = None
            ) -> ChainageSeries:
    """Forward-backward exponentially weighted moving standard deviation.

    Per direction, with the same adjusted weights as ``ewma``, computes the
    weighted mean m_t and variance v_t = sum w_i (x_{t-i} - m_t)^2 / sum w_i;
    the output is the pointwise mean of the two directions' sqrt(v_t).
    """
    if len(series) < 2:
        raise InsufficientDataError("fbewmsd needs at least 2 points")
    if alpha is None:
        if window < 1:
            raise GeometryError(f"window must be >= 1, got {window}")
        alpha = span_to_alpha(window)
    if not 0 < alpha <= 1:
        raise GeometryError(f"alpha must be in (0, 1], got {alpha}")

    def one_direction(x: np.ndarray) -> np.ndarray:
        decay = 1.0 - alpha
        out = np.empty_like(x, dtype=float)
        s1 = 0.0  # sum w_i x
        s2 = 0.0  # sum w_i x^2
        den = 0.0
        for t in range(x.size):
            s1 = x[t] + decay * s1
            s2 = x[t] * x[t] + decay * s2
            den = 1.0 + decay * den
            m = s1 / den
            v = s2 / den - m * m
            out[t] = np.sqrt(max(v, 0.0))
        return out

    # Center on the series mean: mathematically a no-op for the variance,
    # numerically it avoids cancellation at high absolute elevations.
    x = series.values - series.values.mean()
    fwd = one_direction(x)
    bwd = one_direction(x[::-1])[::-1]
    return series.with_values((fwd + bwd) / 2.0)


def load_series_csv(path: str | Path) -> ChainageSeries:
    """Read a series from CSV with header ``chainage_m,value_m``."""
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        expected = ["chainage_m", "value_m"]
        if reader.fieldnames is None or [s.strip() for s in reader.fieldnames[:2]] != expected:
            raise GeometryError(
                f"series CSV must have header 'chainage_m,value_m', got {reader.fieldnames}")
        rows = [(float(r["chainage_m"]), float(r["value_m"])) for r in reader]
    arr = np.array(rows, dtype=float).reshape(-1, 2)
    return ChainageSeries(arr[:, 0], arr[:, 1])


def save_series_csv(series: ChainageSeries, path: str | Path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["chainage_m", "value_m"])
        for c, v in zip(series.chainage, series.values):
            w.writerow([f"{c:.9g}", f"{v:.9g}"])
