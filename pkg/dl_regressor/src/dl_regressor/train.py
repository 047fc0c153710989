"""Training loop: Adam, per-epoch cyclic learning rate, early stopping on
validation RMSE in meters, best-validation weights returned."""

from __future__ import annotations

import copy
from dataclasses import dataclass

import numpy as np
import torch

from . import data, predict
from .data import DataError, Sample
from .model import WseRegressor


@dataclass(frozen=True)
class TrainSpec:
    batch_size: int = 32
    lr_cycle: tuple[float, ...] = (1e-6, 5.5e-6, 0.1e-6)
    patience: int = 10
    min_delta: float = 1e-3   # meters of validation RMSE
    max_epochs: int = 1000
    seed: int = 0
    augment: bool = True
    val_mc_passes: int = 100  # 0 = deterministic validation (dropout off)


def _tensorize(samples: list[Sample], augment: bool
               ) -> tuple[torch.Tensor, torch.Tensor]:
    inputs, targets = [], []
    for s in samples:
        x = data.sample_input(s)
        t = data.standardize_target(s.wse, s.dsm_mean)
        if augment:
            for v in data.augment_arrays(x):
                inputs.append(v)
                targets.append(t)
        else:
            inputs.append(x)
            targets.append(t)
    return (torch.from_numpy(np.stack(inputs)),
            torch.tensor(targets, dtype=torch.float32))


def _val_rmse(model: WseRegressor, samples: list[Sample], passes: int,
              generator: torch.Generator) -> float:
    errs = []
    for s in samples:
        if passes > 0:
            pred = predict.predict_mc(model, s, passes=passes,
                                      p=model.spec.dropout_p,
                                      generator=generator).mean_wse
        else:
            model.eval()
            with torch.no_grad():
                x = torch.from_numpy(data.sample_input(s)).unsqueeze(0)
                pred = data.destandardize_target(float(model(x)[0]), s.dsm_mean)
        errs.append(pred - s.wse)
    return float(np.sqrt(np.mean(np.square(errs))))


def train(model: WseRegressor, train_samples: list[Sample],
          val_samples: list[Sample], spec: TrainSpec = TrainSpec()
          ) -> tuple[dict, dict]:
    """Returns (best-validation state_dict, history).

    History holds per-epoch train loss (MSE on standardized targets) and
    validation RMSE in meters; training stops when the validation RMSE
    has not improved by at least ``min_delta`` for ``patience`` epochs.
    """
    if not train_samples:
        raise DataError("no training samples")
    if not val_samples:
        raise DataError("no validation samples")

    torch.manual_seed(spec.seed)
    generator = torch.Generator().manual_seed(spec.seed)
    inputs, targets = _tensorize(train_samples, spec.augment)
    n = len(targets)
    optimizer = torch.optim.Adam(model.parameters(), lr=spec.lr_cycle[0])
    loss_fn = torch.nn.MSELoss()

    history = {"train_loss": [], "val_rmse": [], "best_epoch": -1}
    best_rmse = float("inf")
    best_state = copy.deepcopy(model.state_dict())
    since_best = 0

    for epoch in range(spec.max_epochs):
        lr = spec.lr_cycle[epoch % len(spec.lr_cycle)]
        for group in optimizer.param_groups:
            group["lr"] = lr

        model.train()
        order = torch.randperm(n, generator=generator)
        epoch_loss = 0.0
        for start in range(0, n, spec.batch_size):
            idx = order[start:start + spec.batch_size]
            optimizer.zero_grad()
            out = model(inputs[idx])
            loss = loss_fn(out, targets[idx])
            loss.backward()
            optimizer.step()
            epoch_loss += float(loss.detach()) * len(idx)
        history["train_loss"].append(epoch_loss / n)

        rmse = _val_rmse(model, val_samples, spec.val_mc_passes, generator)
        history["val_rmse"].append(rmse)
        if rmse < best_rmse - spec.min_delta:
            best_rmse = rmse
            best_state = copy.deepcopy(model.state_dict())
            history["best_epoch"] = epoch
            since_best = 0
        else:
            since_best += 1
            if since_best >= spec.patience:
                break
    model.load_state_dict(best_state)
    return best_state, history
