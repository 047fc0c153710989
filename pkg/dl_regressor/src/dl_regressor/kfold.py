"""Leave-one-subset-out training runs exporting the evaluation CSV."""

from __future__ import annotations

from pathlib import Path

import torch

from . import data, predict, train as train_mod
from .data import DataError, Sample
from .model import ModelSpec, build_model
from .train import TrainSpec

CSV_HEADER = "subset_id,sample_id,chainage_m,wse_pred_m,uncertainty_m"


def run_kfold(dataset_dir: str | Path, fold_plan_path: str | Path,
              model_spec: ModelSpec, train_spec: TrainSpec,
              out_csv: str | Path, mc_passes: int = 100) -> list[predict.McPrediction]:
    """Train one model per fold on its training subsets, predict every
    validation sample with MC dropout, and write all rows to one CSV in
    the evaluation harness's predictions schema."""
    samples, _subsets = data.read_manifest(dataset_dir)
    folds = data.read_fold_plan(fold_plan_path)
    by_subset: dict[str, list[Sample]] = {}
    for s in samples:
        by_subset.setdefault(s.subset_id, []).append(s)

    rows = [CSV_HEADER]
    predictions: list[predict.McPrediction] = []
    for fold in folds:
        val_id = fold["validation_subset"]
        train_ids = fold["training_subsets"]
        val_samples = by_subset.get(val_id, [])
        train_samples = [s for sid in train_ids for s in by_subset.get(sid, [])]
        if not val_samples or not train_samples:
            raise DataError(f"fold {val_id!r}: empty train or validation split")

        model = build_model(model_spec)
        train_mod.train(model, train_samples, val_samples, train_spec)
        generator = torch.Generator().manual_seed(train_spec.seed)
        for s in sorted(val_samples, key=lambda s: s.sample_id):
            mc = predict.predict_mc(model, s, passes=mc_passes,
                                    p=model_spec.dropout_p, generator=generator)
            predictions.append(mc)
            rows.append(f"{s.subset_id},{s.sample_id},{s.chainage:.9g},"
                        f"{mc.mean_wse:.9g},{mc.std_wse:.9g}")
    Path(out_csv).write_text("\n".join(rows) + "\n")
    return predictions
