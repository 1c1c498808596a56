"""Numpy BiLSTM + self-attention window classifier with manual backprop."""

from .checkpoint import CheckpointFormatError, load_params, save_params
from .complexity import ComplexityEstimate, estimate_complexity
from .config import NetConfig, TrainingConfig
from .data import Dataset, generate_dataset
from .estimator import WindowClassifier
from .network import NetParams, NumericError, forward, init_params, loss_and_grad, zero_params
from .training import History, TrainingDivergedError, train

__all__ = [
    "CheckpointFormatError",
    "ComplexityEstimate",
    "Dataset",
    "History",
    "NetConfig",
    "NetParams",
    "NumericError",
    "TrainingConfig",
    "TrainingDivergedError",
    "WindowClassifier",
    "estimate_complexity",
    "forward",
    "generate_dataset",
    "init_params",
    "load_params",
    "loss_and_grad",
    "save_params",
    "train",
    "zero_params",
]
