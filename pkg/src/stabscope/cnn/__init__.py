"""From-scratch convolutional binary classifier on numpy tensors.

Tensors are C-order (row-major) float64 numpy arrays throughout; every layer
implements its own backward pass and the optimizer is hand-rolled Adam.
"""

from .layers import (
    Conv,
    Dense,
    Dropout,
    Flatten,
    GlobalAvgPool,
    MaxPool,
    ReLU,
    bce_loss,
    sigmoid,
)
from .model import Model, ModelConfig, default_config, load_checkpoint, save_checkpoint
from .train import AdamState, TrainConfig, TrainingError, adam_step, predict, train

__all__ = [
    "Conv",
    "Dense",
    "Dropout",
    "Flatten",
    "GlobalAvgPool",
    "MaxPool",
    "ReLU",
    "bce_loss",
    "sigmoid",
    "Model",
    "ModelConfig",
    "default_config",
    "load_checkpoint",
    "save_checkpoint",
    "AdamState",
    "TrainConfig",
    "TrainingError",
    "adam_step",
    "predict",
    "train",
]
