from .layers import (
    Conv2D,
    Deconv2D,
    Dense,
    Flatten,
    Layer,
    MaxPool2D,
    ReLU,
    Sequential,
    Softmax,
    Upsample2D,
    glorot_uniform,
)
from .losses import cross_entropy_loss, mse_loss
from .optim import Adam
from .serialize import build_layer, load_model, save_model

__all__ = [
    "Adam",
    "Conv2D",
    "Deconv2D",
    "Dense",
    "Flatten",
    "Layer",
    "MaxPool2D",
    "ReLU",
    "Sequential",
    "Softmax",
    "Upsample2D",
    "build_layer",
    "cross_entropy_loss",
    "glorot_uniform",
    "load_model",
    "mse_loss",
    "save_model",
]
