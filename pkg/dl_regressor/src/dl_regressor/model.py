"""Patch-to-scalar regression network.

A VGG-style convolutional stack over a 2-channel input (standardized DSM +
standardized orthophoto) with multiresolution input taps: after every
max-pool, the raw 2-channel input is area-downscaled to the current
feature-map size and concatenated, so each stage keeps a direct view of
the patch at its own resolution. The head is a single linear unit with no
output activation; dropout makes Monte-Carlo uncertainty sampling
possible at inference.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import torch
from torch import nn
from torch.nn import functional as F

# convolutional layers per stage of the 5-stage VGG-16 stack, and the
# width of each stage as a multiple of base_channels
_STAGE_CONVS = (2, 2, 3, 3, 3)
_STAGE_WIDTH = (1, 2, 4, 8, 8)


@dataclass(frozen=True)
class ModelSpec:
    """Architecture knobs; defaults give the full-size network."""

    input_px: int = 256
    in_channels: int = 2
    base_channels: int = 64
    n_stages: int = 5
    dropout_p: float = 0.5
    # stages after whose pool+tap a dropout layer is inserted; the head
    # always gets one before the linear unit
    dropout_stages: tuple[int, ...] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.dropout_stages is None:
            last_two = tuple(range(max(0, self.n_stages - 2), self.n_stages))
            object.__setattr__(self, "dropout_stages", last_two)
        if not 1 <= self.n_stages <= len(_STAGE_CONVS):
            raise ValueError(f"n_stages must be in 1..{len(_STAGE_CONVS)}")
        if self.input_px % (2 ** self.n_stages) != 0 or self.input_px <= 0:
            raise ValueError(
                f"input_px {self.input_px} must be a positive multiple of "
                f"{2 ** self.n_stages}")
        if not 0.0 <= self.dropout_p < 1.0:
            raise ValueError(f"dropout_p must be in [0, 1), got {self.dropout_p}")


class WseRegressor(nn.Module):
    def __init__(self, spec: ModelSpec = ModelSpec()):
        super().__init__()
        self.spec = spec
        stages = []
        in_ch = spec.in_channels
        for s in range(spec.n_stages):
            out_ch = spec.base_channels * _STAGE_WIDTH[s]
            convs = []
            for _ in range(_STAGE_CONVS[s]):
                convs.append(nn.Conv2d(in_ch, out_ch, kernel_size=3, padding=1))
                convs.append(nn.ReLU(inplace=True))
                in_ch = out_ch
            convs.append(nn.MaxPool2d(2))
            stages.append(nn.Sequential(*convs))
            # the tap concatenated after the pool widens the next stage
            in_ch = out_ch + spec.in_channels
        self.stages = nn.ModuleList(stages)
        self.stage_dropout = nn.Dropout(p=spec.dropout_p)
        self.head_dropout = nn.Dropout(p=spec.dropout_p)
        final_px = spec.input_px // (2 ** spec.n_stages)
        self.head = nn.Linear(in_ch * final_px * final_px, 1)

    def set_dropout_p(self, p: float) -> None:
        self.stage_dropout.p = p
        self.head_dropout.p = p

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.ndim != 4 or x.shape[1] != self.spec.in_channels \
                or x.shape[2] != self.spec.input_px or x.shape[3] != self.spec.input_px:
            raise ValueError(
                f"expected (B, {self.spec.in_channels}, {self.spec.input_px}, "
                f"{self.spec.input_px}), got {tuple(x.shape)}")
        h = x
        for s, stage in enumerate(self.stages):
            h = stage(h)
            tap = F.adaptive_avg_pool2d(x, h.shape[-1])
            h = torch.cat([h, tap], dim=1)
            if s in self.spec.dropout_stages:
                h = self.stage_dropout(h)
        h = self.head_dropout(torch.flatten(h, 1))
        return self.head(h).squeeze(-1)


def build_model(spec: ModelSpec = ModelSpec()) -> WseRegressor:
    return WseRegressor(spec)


def parameter_count(model: nn.Module) -> int:
    return sum(p.numel() for p in model.parameters())
