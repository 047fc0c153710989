"""Monte-Carlo dropout inference."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch

from . import data
from .data import Sample
from .model import WseRegressor


@dataclass(frozen=True)
class McPrediction:
    sample_id: str
    passes: tuple[float, ...]  # standardized-scale outputs, one per pass
    mean_wse: float            # meters MSL, inverse-standardized mean

    @property
    def std_wse(self) -> float:
        """Sample standard deviation of the passes in meters."""
        scaled = np.asarray(self.passes) * (data.DSM_FACTOR * data.SIGMA_DSM)
        return float(scaled.std(ddof=1)) if len(scaled) > 1 else 0.0


def predict_mc(model: WseRegressor, sample: Sample, passes: int = 100,
               p: float = 0.5, generator: torch.Generator | None = None,
               batch_size: int = 32) -> McPrediction:
    """Run ``passes`` stochastic forward passes with dropout probability
    ``p`` and export the destandardized mean prediction."""
    if generator is not None:
        torch.manual_seed(int(torch.randint(2 ** 31 - 1, (1,), generator=generator)))
    saved_p = model.spec.dropout_p
    model.set_dropout_p(p)
    # train() keeps dropout sampling active; the network has no
    # normalization layers, so no other behavior changes
    model.train() if p > 0 else model.eval()
    x = torch.from_numpy(data.sample_input(sample)).unsqueeze(0)
    outs: list[float] = []
    with torch.no_grad():
        remaining = passes
        while remaining > 0:
            b = min(batch_size, remaining)
            outs.extend(float(v) for v in model(x.expand(b, -1, -1, -1)))
            remaining -= b
    model.set_dropout_p(saved_p)
    model.eval()
    mean = float(np.mean(outs))
    return McPrediction(sample_id=sample.sample_id, passes=tuple(outs),
                        mean_wse=data.destandardize_target(mean, sample.dsm_mean))
