"""Command-line interface: water-edge extraction, dataset building,
prediction evaluation, and fold planning."""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import dataset, lineref, metrics, pipeline, raster, regress, smoothing, svgfig
from .errors import ConfigError, RiverWseError

CONFIG_DEFAULTS = {
    "span": 50,
    "max_dev": 0.1,
    "iterations": 3,
    "degree": 3,
    "breakpoints": [],
    "sd_window_edge": 300,
    "sd_window_points": 10,
    "sigma_dsm": 1.197,
    "n_bins": 10,
    "step": 0.1,
    "range_threshold": 4.5,
    "patch_side": 10.0,
    "patch_px": 256,
}


@dataclass(frozen=True)
class RunConfig:
    span: int
    max_dev: float
    iterations: int
    degree: int
    breakpoints: tuple[float, ...]
    sd_window_edge: int
    sd_window_points: int
    sigma_dsm: float
    n_bins: int
    step: float
    range_threshold: float
    patch_side: float
    patch_px: int

    @property
    def filter_params(self) -> smoothing.FilterParams:
        return smoothing.FilterParams(span=self.span, max_dev=self.max_dev,
                                      iterations=self.iterations)


def load_config(path: str | None) -> RunConfig:
    values = dict(CONFIG_DEFAULTS)
    if path is not None:
        try:
            doc = json.loads(Path(path).read_text())
        except json.JSONDecodeError as e:
            raise ConfigError(f"config is not valid JSON: {e}")
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        unknown = sorted(set(doc) - set(CONFIG_DEFAULTS))
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
        values.update(doc)
    values["breakpoints"] = tuple(float(b) for b in values["breakpoints"])
    return RunConfig(**values)


def _round9(obj):
    """Round every float in a JSON-like structure to 9 significant digits."""
    if isinstance(obj, float):
        return float(f"{obj:.9g}") if math.isfinite(obj) else obj
    if isinstance(obj, dict):
        return {k: _round9(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_round9(v) for v in obj]
    return obj


def _write_json(doc, path: Path) -> None:
    path.write_text(json.dumps(_round9(doc), indent=2) + "\n")


def _read_truth_points(path: str, centerline: lineref.Polyline | None = None) -> np.ndarray:
    """Truth point CSV: either ``chainage_m,wse_m`` or ``x,y,wse_m`` (the
    latter is projected onto the centerline)."""
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        names = [s.strip() for s in (reader.fieldnames or [])]
        rows = list(reader)
    if names[:2] == ["chainage_m", "wse_m"]:
        return np.array([[float(r["chainage_m"]), float(r["wse_m"])] for r in rows])
    if names[:3] == ["x", "y", "wse_m"]:
        if centerline is None:
            raise ConfigError("x,y truth points require a centerline for chainage")
        return np.array([
            [lineref.project_chainage(centerline, float(r["x"]), float(r["y"])),
             float(r["wse_m"])]
            for r in rows])
    raise ConfigError(
        f"truth points CSV must have header 'chainage_m,wse_m' or 'x,y,wse_m', got {names}")


def cmd_water_edge(args) -> int:
    cfg = load_config(args.config)
    dsm = raster.load_dsm_ascii(args.dsm)
    edge = lineref.load_polyline_csv(args.edge)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    result = pipeline.water_edge_workflow(dsm, edge, cfg.filter_params,
                                          step=cfg.step, sd_window=cfg.sd_window_edge)
    smoothing.save_series_csv(result.kept, out / "kept.csv")
    smoothing.save_series_csv(result.removed, out / "removed.csv")
    regress.save_fit_json(result.fit, out / "fit.json")
    pipeline.save_band_csv(result.band, out / "band.csv")

    raw_chain = np.concatenate([result.kept.chainage, result.removed.chainage])
    raw_vals = np.concatenate([result.kept.values, result.removed.values])
    order = np.argsort(raw_chain, kind="stable")
    series = [
        svgfig.Series(raw_chain[order], raw_vals[order], "#bbbbbb", "raw", "points"),
        svgfig.Series(result.kept.chainage, result.kept.values, "#ff8800", "filtered", "points"),
        svgfig.Series(result.kept.chainage,
                      np.asarray(regress.predict(result.fit, result.kept.chainage)),
                      "#000000", "regression", "dashed"),
    ]
    svgfig.save(series, out / "figure.svg", "chainage (m)", "WSE (m MSL)",
                "water-edge series before/after filtering")

    if args.truth:
        truth_pts = _read_truth_points(args.truth)
        truth_fit, s_e = pipeline.ground_truth_build(truth_pts, degree=cfg.degree,
                                                     breakpoints=cfg.breakpoints)
        chain = result.kept.chainage
        truth = np.asarray(regress.predict(truth_fit, chain))
        fit_pred = np.asarray(regress.predict(result.fit, chain))
        pairs = [metrics.EvalPair(c, t, p, u) for c, t, p, u in
                 zip(chain, truth, result.kept.values, result.band.half_width)]
        fit_pairs = [metrics.EvalPair(c, t, p) for c, t, p in zip(chain, truth, fit_pred)]
        report = {
            "subset_id": args.subset_id or "",
            "rmse_points_m": metrics.rmse(pairs),
            "rmse_regression_m": metrics.rmse(fit_pairs),
            "mean_uncertainty_m": metrics.mean_uncertainty(pairs),
            "uce_native": metrics.uce(pairs, cfg.n_bins),
            "uce_cm_scaled": metrics.uce_cm_scaled(pairs, cfg.n_bins),
            "n": len(pairs),
            "truth_s_e_m": s_e,
            "n_nodata_dropped": result.n_nodata_dropped,
        }
        _write_json(report, out / "report.json")
    print(f"kept {len(result.kept)} removed {len(result.removed)} "
          f"nodata-dropped {result.n_nodata_dropped}")
    return 0


def _read_squares(path: str) -> list[dict]:
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        names = [s.strip() for s in (reader.fieldnames or [])]
        if names[:2] != ["center_x", "center_y"]:
            raise ConfigError(
                f"squares CSV must have header starting 'center_x,center_y', got {names}")
        return [
            {"center_x": float(r["center_x"]), "center_y": float(r["center_y"]),
             "centroid_lat": float(r.get("centroid_lat") or 0.0),
             "centroid_lon": float(r.get("centroid_lon") or 0.0)}
            for r in reader]


def cmd_extract_dataset(args) -> int:
    cfg = load_config(args.config)
    dsm = raster.load_dsm_ascii(args.dsm)
    ortho = raster.load_ortho_pgm(args.ortho, args.ortho_world)
    centerline = lineref.load_polyline_csv(args.centerline)
    squares = _read_squares(args.squares)
    truth_pts = _read_truth_points(args.truth_points, centerline)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    written: list[str] = []
    n_filtered = 0
    n_skipped = 0
    if len(truth_pts):
        truth_fit, s_e = pipeline.ground_truth_build(truth_pts, degree=cfg.degree,
                                                     breakpoints=cfg.breakpoints)
    for i, sq in enumerate(squares):
        half = cfg.patch_side / 2
        box = (sq["center_x"] - half, sq["center_y"] - half,
               sq["center_x"] + half, sq["center_y"] + half)
        try:
            dsm_patch = raster.extract_patch(dsm, sq["center_x"], sq["center_y"],
                                             side=cfg.patch_side, out_px=cfg.patch_px)
            ortho_patch = raster.extract_patch(ortho, sq["center_x"], sq["center_y"],
                                               side=cfg.patch_side, out_px=cfg.patch_px)
            wse = pipeline.assign_truth(truth_fit, centerline, box, step=cfg.step)
            c_lo, c_hi = lineref.clip_chainage_range(centerline, box)
            sample = dataset.make_sample(
                ortho=np.rint(ortho_patch.values).astype(np.uint8),
                dsm=dsm_patch.values, wse=wse,
                centroid_lat=sq["centroid_lat"], centroid_lon=sq["centroid_lon"],
                chainage=(c_lo + c_hi) / 2, subset_id=args.subset_id)
        except RiverWseError as e:
            print(f"square {i}: skipped ({e.__class__.__name__}: {e})", file=sys.stderr)
            n_skipped += 1
            continue
        if not dataset.range_filter(sample, cfg.range_threshold):
            n_filtered += 1
            continue
        rel = f"sample_{i:04d}"
        dataset.write_sample(sample, out / rel)
        written.append(rel)
    dataset.write_manifest(written, [args.subset_id] if written else [], out / "manifest.json")
    print(f"written {len(written)} filtered {n_filtered} skipped {n_skipped}")
    return 0


def cmd_evaluate(args) -> int:
    cfg = load_config(args.config)
    preds = pipeline.load_predictions_csv(args.preds)
    truth_dir = Path(args.truth)
    truth_fits = {}
    for subset_id in sorted({p.subset_id for p in preds}):
        fit_path = truth_dir / f"{subset_id}.json"
        if not fit_path.is_file():
            raise ConfigError(f"no ground-truth fit for subset '{subset_id}' "
                              f"(expected {fit_path})")
        truth_fits[subset_id] = regress.load_fit_json(fit_path)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    reports, bands = pipeline.evaluate_predictions(
        preds, truth_fits, sd_window=cfg.sd_window_points, n_bins=cfg.n_bins)
    _write_json([r.to_json() for r in reports], out / "report.json")
    for r in reports:
        band = bands[r.subset_id]
        pipeline.save_band_csv(band, out / f"band_{r.subset_id}.csv")
        rows = sorted((p for p in preds if p.subset_id == r.subset_id),
                      key=lambda p: p.chainage)
        chain = np.array([p.chainage for p in rows])
        pred = np.array([p.wse_pred for p in rows])
        truth_fit = truth_fits[r.subset_id]
        dense = np.linspace(chain.min(), chain.max(), 200)
        series = [
            svgfig.Series(dense, np.asarray(regress.predict(truth_fit, dense)),
                          "#000000", "ground truth", "line"),
            svgfig.Series(chain, pred, "#2266cc", "predictions", "points"),
            svgfig.Series(dense, np.asarray(regress.predict(r.fit, dense)),
                          "#cc2222", "prediction regression", "dashed"),
        ]
        svgfig.save(series, out / f"figure_{r.subset_id}.svg",
                    "chainage (m)", "WSE (m MSL)", f"subset {r.subset_id}")
        band_series = [
            svgfig.Series(band.chainage, band.center, "#cc2222", "regression", "line"),
            svgfig.Series(band.chainage, band.center + band.half_width,
                          "#888888", "+1 sd", "dashed"),
            svgfig.Series(band.chainage, band.center - band.half_width,
                          "#888888", "-1 sd", "dashed"),
        ]
        svgfig.save(band_series, out / f"band_{r.subset_id}.svg",
                    "chainage (m)", "WSE (m MSL)", f"uncertainty band {r.subset_id}")
    print(f"evaluated {len(reports)} subset(s)")
    return 0


def cmd_kfold_plan(args) -> int:
    manifest = dataset.read_manifest(args.manifest)
    plan = pipeline.kfold_plan(manifest["subsets"])
    _write_json(plan.to_json(), Path(args.out))
    print(f"{len(plan.folds)} folds")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="riverwse",
        description="River water surface elevation estimation from UAV rasters")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("water-edge", help="run the water-edge WSE workflow")
    p.add_argument("--dsm", required=True, help="DSM raster (ESRI ASCII grid)")
    p.add_argument("--edge", required=True, help="water-edge polyline CSV (x,y)")
    p.add_argument("--truth", help="ground-truth WSE points CSV (chainage_m,wse_m)")
    p.add_argument("--subset-id", help="subset id recorded in the report")
    p.add_argument("--config", help="run configuration JSON")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_water_edge)

    p = sub.add_parser("extract-dataset", help="build ML samples from rasters")
    p.add_argument("--dsm", required=True)
    p.add_argument("--ortho", required=True, help="orthophoto (binary P5 PGM)")
    p.add_argument("--ortho-world", required=True, help="orthophoto world file")
    p.add_argument("--centerline", required=True, help="centerline polyline CSV (x,y)")
    p.add_argument("--squares", required=True, help="sample squares CSV (center_x,center_y)")
    p.add_argument("--truth-points", required=True,
                   help="truth WSE points CSV (chainage_m,wse_m or x,y,wse_m)")
    p.add_argument("--subset-id", required=True)
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_extract_dataset)

    p = sub.add_parser("evaluate", help="evaluate predictions against ground truth")
    p.add_argument("--preds", required=True, help="predictions CSV")
    p.add_argument("--truth", required=True,
                   help="directory of per-subset ground-truth fit JSON files")
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("kfold-plan", help="emit a leave-one-subset-out fold plan")
    p.add_argument("--manifest", required=True, help="dataset manifest.json")
    p.add_argument("--out", required=True, help="fold plan JSON output path")
    p.set_defaults(func=cmd_kfold_plan)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"ConfigError: {e}", file=sys.stderr)
        return 2
    except RiverWseError as e:
        print(f"{e.__class__.__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
