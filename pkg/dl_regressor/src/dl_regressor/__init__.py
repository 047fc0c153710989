"""CNN water-surface-elevation regressor with Monte-Carlo dropout."""

from . import data, kfold, model, predict, train
from .data import DataError, Sample
from .kfold import run_kfold
from .model import ModelSpec, WseRegressor, build_model, parameter_count
from .predict import McPrediction, predict_mc
from .train import TrainSpec

__version__ = "0.1.0"

__all__ = [
    "DataError", "McPrediction", "ModelSpec", "Sample", "TrainSpec",
    "WseRegressor", "build_model", "data", "kfold", "model",
    "parameter_count", "predict", "predict_mc", "run_kfold", "train",
]
