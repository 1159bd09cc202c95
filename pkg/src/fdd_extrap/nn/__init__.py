"""From-scratch numpy neural networks: layers, architectures, training,
and model serialization."""

from .layers import BatchNorm, Conv2d, Dense, Dropout, Flatten, Layer, LeakyReLU, MaxPool2d
from .network import (
    CNN_DENSE_WIDTHS,
    MLP_HIDDEN_WIDTHS,
    LayerSpec,
    Network,
    NetworkSpec,
    build_cnn,
    build_mlp,
    complex_to_real,
    layer_shapes,
    param_count,
    real_to_complex,
)
from .serialize import load_model, save_model
from .training import (
    Adam,
    Standardizer,
    TrainConfig,
    TrainingHistory,
    evaluate_mse,
    mse_and_grad,
    predict,
    train,
)

__all__ = [
    "Layer",
    "Dense",
    "BatchNorm",
    "Dropout",
    "LeakyReLU",
    "Conv2d",
    "MaxPool2d",
    "Flatten",
    "LayerSpec",
    "NetworkSpec",
    "Network",
    "layer_shapes",
    "param_count",
    "build_mlp",
    "build_cnn",
    "complex_to_real",
    "real_to_complex",
    "MLP_HIDDEN_WIDTHS",
    "CNN_DENSE_WIDTHS",
    "Standardizer",
    "TrainConfig",
    "TrainingHistory",
    "Adam",
    "mse_and_grad",
    "evaluate_mse",
    "predict",
    "train",
    "save_model",
    "load_model",
]
