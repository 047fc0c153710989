"""Scalar evaluation metrics: RMSE, mean uncertainty, and the binned
uncertainty calibration error (UCE)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IncompleteDataError, InsufficientDataError


@dataclass(frozen=True)
class EvalPair:
    """One evaluated prediction: truth and prediction in m MSL, optional
    predicted uncertainty (a standard deviation, meters)."""

    chainage: float
    truth: float
    pred: float
    uncertainty: float | None = None

    def __post_init__(self):
        vals = [self.chainage, self.truth, self.pred]
        if self.uncertainty is not None:
            if self.uncertainty < 0:
                raise IncompleteDataError(f"uncertainty must be >= 0, got {self.uncertainty}")
            vals.append(self.uncertainty)
        if not np.all(np.isfinite(vals)):
            raise IncompleteDataError("EvalPair fields must be finite")


def rmse(pairs: list[EvalPair]) -> float:
    """Root mean squared error of predictions against truth."""
    if not pairs:
        raise InsufficientDataError("rmse of empty pair list")
    err = np.array([p.pred - p.truth for p in pairs])
    return float(np.sqrt(np.mean(err ** 2)))


def _uncertainties(pairs: list[EvalPair]) -> np.ndarray:
    if not pairs:
        raise InsufficientDataError("no pairs supplied")
    if any(p.uncertainty is None for p in pairs):
        raise IncompleteDataError("every pair must carry an uncertainty")
    return np.array([p.uncertainty for p in pairs], dtype=float)


def mean_uncertainty(pairs: list[EvalPair]) -> float:
    """Arithmetic mean of the predicted uncertainties (meters)."""
    return float(_uncertainties(pairs).mean())


def uce(pairs: list[EvalPair], n_bins: int = 10) -> float:
    """Uncertainty calibration error in native m^2 units.

    Pairs are binned by predicted uncertainty into ``n_bins`` equal-width
    bins over [min sigma, max sigma]; each bin contributes its weight
    |B|/N times |MSE(B) - mean(sigma^2)(B)|. Uncertainties are standard
    deviations and are squared into variances for the comparison.
    """
    if n_bins < 1:
        raise InsufficientDataError(f"n_bins must be >= 1, got {n_bins}")
    sigma = _uncertainties(pairs)
    err2 = np.array([(p.pred - p.truth) ** 2 for p in pairs])
    lo = sigma.min()
    hi = sigma.max()
    if hi == lo:
        bins = np.zeros(sigma.size, dtype=int)
    else:
        bins = np.minimum((n_bins * (sigma - lo) / (hi - lo)).astype(int), n_bins - 1)
    total = 0.0
    n = sigma.size
    for b in range(n_bins):
        mask = bins == b
        if not mask.any():
            continue
        gap = abs(err2[mask].mean() - (sigma[mask] ** 2).mean())
        total += (mask.sum() / n) * gap
    return float(total)


def uce_cm_scaled(pairs: list[EvalPair], n_bins: int = 10) -> float:
    """UCE with errors and uncertainties expressed in centimeters (cm^2
    units); equals the native value times 1e4."""
    return uce(pairs, n_bins) * 1e4
