"""End-to-end workflows: ground-truth construction, the water-edge method,
leave-one-subset-out fold planning, and prediction evaluation with
uncertainty bands."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import lineref, metrics, raster, regress, smoothing
from .errors import InsufficientDataError

PREDICTIONS_HEADER = ["subset_id", "sample_id", "chainage_m", "wse_pred_m", "uncertainty_m"]


@dataclass(frozen=True)
class Fold:
    validation_subset: str
    training_subsets: tuple[str, ...]


@dataclass(frozen=True)
class FoldPlan:
    folds: tuple[Fold, ...]

    def to_json(self) -> dict:
        return {"folds": [
            {"validation_subset": f.validation_subset,
             "training_subsets": list(f.training_subsets)}
            for f in self.folds]}


@dataclass(frozen=True)
class UncertaintyBand:
    """Band drawn as center +- half_width against chainage."""

    chainage: np.ndarray
    center: np.ndarray
    half_width: np.ndarray

    def __post_init__(self):
        if np.any(np.asarray(self.half_width) < 0):
            raise InsufficientDataError("band half_width must be >= 0")


@dataclass(frozen=True)
class SubsetReport:
    subset_id: str
    rmse_points_m: float
    rmse_regression_m: float
    mean_uncertainty_m: float
    uce_native: float
    uce_cm_scaled: float
    n: int
    fit: regress.LinearFit

    def to_json(self) -> dict:
        return {
            "subset_id": self.subset_id,
            "rmse_points_m": self.rmse_points_m,
            "rmse_regression_m": self.rmse_regression_m,
            "mean_uncertainty_m": self.mean_uncertainty_m,
            "uce_native": self.uce_native,
            "uce_cm_scaled": self.uce_cm_scaled,
            "n": self.n,
            "fit": regress.fit_to_json(self.fit),
        }


@dataclass(frozen=True)
class WaterEdgeResult:
    kept: smoothing.ChainageSeries
    removed: smoothing.ChainageSeries
    fit: regress.LinearFit
    band: UncertaintyBand
    n_nodata_dropped: int = 0

    def __iter__(self):
        # Allows kept, removed, fit, band = water_edge_workflow(...)
        return iter((self.kept, self.removed, self.fit, self.band))


def ground_truth_build(points, degree: int = 3, breakpoints=()
                       ) -> tuple[regress.PiecewisePolyFit, float]:
    """Fit the ground-truth WSE profile against chainage and grade it with
    the standard error of estimate. Breakpoints model abrupt WSE steps
    (e.g. at a dam)."""
    fit = regress.poly_fit(points, degree=degree, breakpoints=breakpoints)
    s_e = regress.std_error_estimate(points, fit)
    return fit, s_e


def assign_truth(fit, centerline: lineref.Polyline,
                 square: tuple[float, float, float, float], step: float = 0.1) -> float:
    """Mean fitted WSE over the centerline portion inside the square,
    densified at ``step`` meters."""
    c_lo, c_hi = lineref.clip_chainage_range(centerline, square)
    chain = np.arange(c_lo, c_hi, step)
    if chain.size == 0 or c_hi - chain[-1] > 1e-12 * max(1.0, c_hi):
        chain = np.append(chain, c_hi)
    return float(np.mean(regress.predict(fit, chain)))


def _band_half_width(series: smoothing.ChainageSeries, fit, sd_window: int,
                     sd_on_residuals: bool) -> np.ndarray:
    """FBEWMSD half-width; by default on residuals from the fitted line so
    a trend does not register as uncertainty and exact-line series give a
    zero-width band."""
    if sd_on_residuals:
        series = series.with_values(
            series.values - np.asarray(regress.predict(fit, series.chainage)))
    return smoothing.fbewmsd(series, sd_window).values


def water_edge_workflow(dsm: raster.Grid, edge: lineref.Polyline,
                        params: smoothing.FilterParams = smoothing.FilterParams(),
                        step: float = 0.1, sd_window: int = 300,
                        sd_on_residuals: bool = True) -> WaterEdgeResult:
    """The water-edge method: sample the DSM every ``step`` meters along the
    edge line, reject outliers by FBEWMA, fit a line against chainage, and
    attach an FBEWMSD uncertainty band centered on the fit."""
    pts = lineref.densify(edge, step)
    chain = np.array([p.chainage for p in pts])
    xs = np.array([p.x for p in pts])
    ys = np.array([p.y for p in pts])
    vals = raster.sample_bilinear_many(dsm, xs, ys)
    ok = np.isfinite(vals)
    n_dropped = int((~ok).sum())
    if not ok.any():
        raise InsufficientDataError("no valid DSM samples along the edge line")
    series = smoothing.ChainageSeries(chain[ok], vals[ok])
    kept, removed = smoothing.reject_outliers(series, params)
    fit = regress.ols_fit(np.column_stack([kept.chainage, kept.values]))
    half = _band_half_width(kept, fit, sd_window, sd_on_residuals)
    band = UncertaintyBand(chainage=kept.chainage,
                           center=np.asarray(regress.predict(fit, kept.chainage)),
                           half_width=half)
    return WaterEdgeResult(kept=kept, removed=removed, fit=fit, band=band,
                           n_nodata_dropped=n_dropped)


def kfold_plan(subset_ids: list[str]) -> FoldPlan:
    """Leave-one-subset-out plan: one fold per subset id."""
    ids = list(subset_ids)
    if len(set(ids)) != len(ids):
        raise InsufficientDataError("subset ids must be distinct")
    if len(ids) < 2:
        raise InsufficientDataError(f"need >= 2 subsets, got {len(ids)}")
    folds = tuple(
        Fold(validation_subset=v,
             training_subsets=tuple(t for t in ids if t != v))
        for v in ids)
    return FoldPlan(folds=folds)


@dataclass(frozen=True)
class Prediction:
    subset_id: str
    chainage: float
    wse_pred: float
    sample_id: str = ""
    uncertainty: float | None = None


def evaluate_predictions(preds: list[Prediction], truth_fits: dict,
                         sd_window: int = 10, n_bins: int = 10,
                         sd_on_residuals: bool = True
                         ) -> tuple[list[SubsetReport], dict[str, UncertaintyBand]]:
    """Per-subset evaluation of WSE predictions against ground-truth fits.

    For each subset: an OLS line of predictions vs chainage, point and
    regression RMSE against the truth fit, FBEWMSD uncertainty of the
    chainage-ordered prediction series, and the calibration error of that
    uncertainty against the observed point errors.
    """
    by_subset: dict[str, list[Prediction]] = {}
    for p in preds:
        by_subset.setdefault(p.subset_id, []).append(p)
    reports = []
    bands = {}
    for subset_id in sorted(by_subset):
        if subset_id not in truth_fits:
            raise InsufficientDataError(f"no ground-truth fit for subset '{subset_id}'")
        rows = sorted(by_subset[subset_id], key=lambda p: p.chainage)
        chain = np.array([p.chainage for p in rows])
        pred = np.array([p.wse_pred for p in rows])
        if chain.size < 2 or np.unique(chain).size < 2:
            raise InsufficientDataError(
                f"subset '{subset_id}' needs >= 2 predictions with distinct chainage")
        truth_fit = truth_fits[subset_id]
        truth = np.asarray(regress.predict(truth_fit, chain))
        fit = regress.ols_fit(np.column_stack([chain, pred]))
        fit_pred = np.asarray(regress.predict(fit, chain))
        series = smoothing.ChainageSeries(*_dedupe_chainage(chain, pred))
        half = _band_half_width(series, fit, sd_window, sd_on_residuals)
        sigma = np.interp(chain, series.chainage, half)
        pairs = [metrics.EvalPair(chainage=c, truth=t, pred=p_, uncertainty=s)
                 for c, t, p_, s in zip(chain, truth, pred, sigma)]
        fit_pairs = [metrics.EvalPair(chainage=c, truth=t, pred=f)
                     for c, t, f in zip(chain, truth, fit_pred)]
        reports.append(SubsetReport(
            subset_id=subset_id,
            rmse_points_m=metrics.rmse(pairs),
            rmse_regression_m=metrics.rmse(fit_pairs),
            mean_uncertainty_m=metrics.mean_uncertainty(pairs),
            uce_native=metrics.uce(pairs, n_bins),
            uce_cm_scaled=metrics.uce_cm_scaled(pairs, n_bins),
            n=len(rows),
            fit=fit))
        bands[subset_id] = UncertaintyBand(chainage=series.chainage,
                                           center=np.asarray(regress.predict(fit, series.chainage)),
                                           half_width=half)
    return reports, bands


def _dedupe_chainage(chain: np.ndarray, values: np.ndarray):
    """Collapse duplicate chainages (mean of values) so the series is
    strictly increasing."""
    uniq, inverse = np.unique(chain, return_inverse=True)
    if uniq.size == chain.size:
        return chain, values
    sums = np.zeros(uniq.size)
    counts = np.zeros(uniq.size)
    np.add.at(sums, inverse, values)
    np.add.at(counts, inverse, 1)
    return uniq, sums / counts


def load_predictions_csv(path: str | Path) -> list[Prediction]:
    """Read the predictions CSV (header ``subset_id,sample_id,chainage_m,
    wse_pred_m,uncertainty_m``; the uncertainty column is optional)."""
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        names = [s.strip() for s in (reader.fieldnames or [])]
        if names[:4] != PREDICTIONS_HEADER[:4]:
            raise InsufficientDataError(
                f"predictions CSV header must start with {PREDICTIONS_HEADER[:4]}, got {names}")
        preds = []
        for row in reader:
            unc = row.get("uncertainty_m")
            preds.append(Prediction(
                subset_id=row["subset_id"],
                sample_id=row["sample_id"],
                chainage=float(row["chainage_m"]),
                wse_pred=float(row["wse_pred_m"]),
                uncertainty=float(unc) if unc not in (None, "",) else None))
    return preds


def save_predictions_csv(preds: list[Prediction], path: str | Path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(PREDICTIONS_HEADER)
        for p in preds:
            w.writerow([p.subset_id, p.sample_id, f"{p.chainage:.9g}", f"{p.wse_pred:.9g}",
                        "" if p.uncertainty is None else f"{p.uncertainty:.9g}"])


def save_band_csv(band: UncertaintyBand, path: str | Path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["chainage_m", "center_m", "half_width_m"])
        for c, m, h in zip(band.chainage, band.center, band.half_width):
            w.writerow([f"{c:.9g}", f"{m:.9g}", f"{h:.9g}"])
