"""Mean-squared-error training with Adam.

``train`` owns all randomness through one generator seeded from the config:
the train/validation split, per-epoch shuffling, and dropout masks, so a
given (network seed, data, config) triple reproduces bit-for-bit.

Inputs are used exactly as given — standardize first with ``Standardizer``
and keep its statistics with the model so inference applies the same map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..exceptions import ConfigError, TrainingDivergedError
from .network import Network

__all__ = [
    "Standardizer",
    "TrainConfig",
    "TrainingHistory",
    "Adam",
    "mse_and_grad",
    "evaluate_mse",
    "predict",
    "train",
]


@dataclass
class Standardizer:
    """Per-feature affine map x -> (x - mean) / std fitted on training data."""

    mean: np.ndarray
    std: np.ndarray

    STD_FLOOR = 1e-12

    @classmethod
    def fit(cls, x: np.ndarray) -> "Standardizer":
        x = np.asarray(x, dtype=np.float64)
        if x.ndim < 2 or x.shape[0] < 1:
            raise ValueError(f"need a non-empty batch of features, got shape {x.shape}")
        std = x.std(axis=0)
        return cls(mean=x.mean(axis=0), std=np.maximum(std, cls.STD_FLOOR))

    @classmethod
    def identity(cls, feature_shape: tuple[int, ...]) -> "Standardizer":
        return cls(mean=np.zeros(feature_shape), std=np.ones(feature_shape))

    def transform(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[1:] != self.mean.shape:
            raise ValueError(f"feature shape {x.shape[1:]} != fitted shape {self.mean.shape}")
        return (x - self.mean) / self.std


@dataclass(frozen=True)
class TrainConfig:
    epochs: int
    batch_size: int = 32
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    validation_fraction: float = 0.1
    seed: int = 0

    def __post_init__(self) -> None:
        if not isinstance(self.epochs, int) or self.epochs < 1:
            raise ConfigError(f"epochs must be a positive integer, got {self.epochs!r}")
        if not isinstance(self.batch_size, int) or self.batch_size < 2:
            raise ConfigError(f"batch_size must be an integer >= 2, got {self.batch_size!r}")
        if not (self.lr > 0 and math.isfinite(self.lr)):
            raise ConfigError(f"lr must be positive and finite, got {self.lr!r}")
        for name in ("beta1", "beta2"):
            value = getattr(self, name)
            if not (0.0 <= value < 1.0):
                raise ConfigError(f"{name} must lie in [0, 1), got {value!r}")
        if not (self.eps > 0):
            raise ConfigError(f"eps must be positive, got {self.eps!r}")
        if not (0.0 <= self.validation_fraction < 1.0):
            raise ConfigError(
                f"validation_fraction must lie in [0, 1), got {self.validation_fraction!r}"
            )
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed!r}")


@dataclass
class TrainingHistory:
    """Per-epoch mean training-batch loss and eval-mode validation loss
    (NaN when no validation split was held out)."""

    train_mse: "list[float]" = field(default_factory=list)
    val_mse: "list[float]" = field(default_factory=list)


class Adam:
    """Adam with bias correction; updates parameters in place."""

    def __init__(self, params: "list[np.ndarray]", lr: float, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]

    def step(self, params: "list[np.ndarray]", grads: "list[np.ndarray]") -> None:
        if len(params) != len(self.m) or len(grads) != len(self.m):
            raise ValueError("parameter list changed since the optimizer was created")
        self.t += 1
        bc1 = 1.0 - self.beta1**self.t
        bc2 = 1.0 - self.beta2**self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m += (1.0 - self.beta1) * (g - m)
            v += (1.0 - self.beta2) * (g * g - v)
            p -= self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)


def mse_and_grad(pred: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean squared error over every element, and d(loss)/d(pred)."""
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch: pred {pred.shape} vs target {target.shape}")
    diff = pred - target
    loss = float(np.mean(diff * diff))
    return loss, (2.0 / diff.size) * diff


def evaluate_mse(network: Network, inputs: np.ndarray, targets: np.ndarray,
                 batch_size: int = 256) -> float:
    """Eval-mode MSE over a whole dataset, computed in chunks."""
    if len(inputs) != len(targets) or len(inputs) < 1:
        raise ValueError(f"need matching non-empty inputs/targets, got {len(inputs)}/{len(targets)}")
    total = 0.0
    count = 0
    for start in range(0, len(inputs), batch_size):
        stop = start + batch_size
        pred = network.forward(inputs[start:stop], train=False)
        diff = pred - targets[start:stop]
        total += float(np.sum(diff * diff))
        count += diff.size
    return total / count


def predict(network: Network, inputs: np.ndarray, batch_size: int = 256) -> np.ndarray:
    """Eval-mode forward over a whole dataset, computed in chunks."""
    outputs = [
        network.forward(inputs[start : start + batch_size], train=False)
        for start in range(0, len(inputs), batch_size)
    ]
    return np.concatenate(outputs, axis=0)


def train(network: Network, inputs: np.ndarray, targets: np.ndarray,
          cfg: TrainConfig) -> tuple[Network, TrainingHistory]:
    """Train in place and return (network, history).

    A non-finite batch loss aborts with ``TrainingDivergedError``.  Batches
    that would contain a single sample are skipped (batch normalization has
    no usable statistics there).
    """
    inputs = np.asarray(inputs, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if len(inputs) != len(targets):
        raise ValueError(f"inputs/targets length mismatch: {len(inputs)} vs {len(targets)}")
    n = len(inputs)
    rng = np.random.default_rng(cfg.seed)
    order = rng.permutation(n)
    n_val = int(round(cfg.validation_fraction * n))
    if n - n_val < 2:
        raise ValueError(
            f"validation_fraction {cfg.validation_fraction} leaves {n - n_val} of {n} samples "
            "to train on; need at least 2"
        )
    val_idx = order[:n_val]
    train_idx = order[n_val:]
    adam = Adam(network.params(), lr=cfg.lr, beta1=cfg.beta1, beta2=cfg.beta2, eps=cfg.eps)
    history = TrainingHistory()
    for epoch in range(cfg.epochs):
        shuffled = train_idx[rng.permutation(len(train_idx))]
        batch_losses = []
        for b, start in enumerate(range(0, len(shuffled), cfg.batch_size)):
            batch = shuffled[start : start + cfg.batch_size]
            if len(batch) < 2:
                continue
            # Overflow here is not an error condition per se: it is caught
            # by the finiteness check and surfaced as divergence.
            with np.errstate(over="ignore", invalid="ignore"):
                pred = network.forward(inputs[batch], train=True, rng=rng)
                loss, dpred = mse_and_grad(pred, targets[batch])
            if not math.isfinite(loss):
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch}, batch {b} (lr={cfg.lr})"
                )
            network.zero_grads()
            network.backward(dpred)
            adam.step(network.params(), network.grads())
            batch_losses.append(loss)
        history.train_mse.append(float(np.mean(batch_losses)) if batch_losses else math.nan)
        if n_val:
            history.val_mse.append(evaluate_mse(network, inputs[val_idx], targets[val_idx]))
        else:
            history.val_mse.append(math.nan)
    return network, history
