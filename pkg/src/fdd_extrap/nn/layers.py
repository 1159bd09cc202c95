"""Neural-network layers with explicit forward/backward passes.

Everything is float64 numpy; each layer caches what its backward pass needs
during forward.  Conventions:

* ``forward(x, train, rng)`` — ``train`` selects batch statistics
  (BatchNorm) and dropout masking; ``rng`` is only consumed by Dropout, and
  only to sample a fresh mask.  Calling Dropout with ``train=True`` and
  ``rng=None`` reuses the previously sampled mask, which makes the loss a
  deterministic function of the parameters — exactly what finite-difference
  gradient checks need.
* ``backward(grad)`` — consumes d(loss)/d(output), fills the layer's
  parameter gradients, and returns d(loss)/d(input).
* ``weight_count()`` — the documented accounting of learnable weights:
  ``n_in * n_out`` for dense layers, ``kh * kw * out_channels`` for
  convolutions (a per-output-channel kernel accounting), zero for everything
  else; biases and normalization parameters are excluded.
* ``state()`` / ``load_state`` — every array needed to reproduce inference,
  i.e. parameters plus BatchNorm running statistics.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..exceptions import ShapeError

__all__ = [
    "Layer",
    "Dense",
    "BatchNorm",
    "Dropout",
    "LeakyReLU",
    "Conv2d",
    "MaxPool2d",
    "Flatten",
]

BN_EPS = 1e-5
BN_MOMENTUM = 0.1


class Layer:
    """Base class; subclasses override the hooks they need."""

    def forward(self, x: np.ndarray, train: bool, rng: "np.random.Generator | None" = None) -> np.ndarray:
        raise NotImplementedError

    def backward(self, grad: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def params(self) -> "list[np.ndarray]":
        return []

    def grads(self) -> "list[np.ndarray]":
        return []

    def weight_count(self) -> int:
        return 0

    def state(self) -> "list[np.ndarray]":
        return self.params()

    def load_state(self, arrays: "list[np.ndarray]") -> None:
        own = self.state()
        if len(arrays) != len(own):
            raise ValueError(f"{type(self).__name__}: expected {len(own)} state arrays, got {len(arrays)}")
        for target, source in zip(own, arrays):
            if target.shape != source.shape:
                raise ShapeError(
                    f"{type(self).__name__}: state array shape {source.shape} != expected {target.shape}"
                )
            target[...] = source


class Dense(Layer):
    """Affine map (B, n_in) -> (B, n_out)."""

    def __init__(self, n_in: int, n_out: int, rng: np.random.Generator):
        if n_in < 1 or n_out < 1:
            raise ValueError(f"dense dimensions must be positive, got ({n_in}, {n_out})")
        self.n_in = n_in
        self.n_out = n_out
        scale = np.sqrt(2.0 / (n_in + n_out))
        self.w = rng.normal(0.0, scale, size=(n_in, n_out))
        self.b = np.zeros(n_out)
        self.dw = np.zeros_like(self.w)
        self.db = np.zeros_like(self.b)
        self._x: "np.ndarray | None" = None

    def forward(self, x, train, rng=None):
        self._x = x
        return x @ self.w + self.b

    def backward(self, grad):
        self.dw += self._x.T @ grad
        self.db += grad.sum(axis=0)
        return grad @ self.w.T

    def params(self):
        return [self.w, self.b]

    def grads(self):
        return [self.dw, self.db]

    def weight_count(self):
        return self.n_in * self.n_out


class BatchNorm(Layer):
    """Normalize over the batch (and spatial axes, for 4-d input) per
    feature/channel, then apply a learned affine map.

    Normalization uses the biased batch variance; the running variance is
    updated with the unbiased estimate (exponential averaging, momentum 0.1)
    so eval-mode activations match train-mode scale in expectation even at
    small batch sizes.  Running statistics drive eval-mode normalization.
    """

    def __init__(self, n_features: int):
        if n_features < 1:
            raise ValueError(f"n_features must be positive, got {n_features}")
        self.n_features = n_features
        self.gamma = np.ones(n_features)
        self.beta = np.zeros(n_features)
        self.dgamma = np.zeros_like(self.gamma)
        self.dbeta = np.zeros_like(self.beta)
        self.running_mean = np.zeros(n_features)
        self.running_var = np.ones(n_features)
        self._cache = None

    def _axes_and_shape(self, x: np.ndarray):
        if x.ndim == 2:
            return (0,), (1, self.n_features)
        if x.ndim == 4:
            return (0, 2, 3), (1, self.n_features, 1, 1)
        raise ShapeError(f"BatchNorm expects 2-d or 4-d input, got shape {x.shape}")

    def forward(self, x, train, rng=None):
        axes, pshape = self._axes_and_shape(x)
        gamma = self.gamma.reshape(pshape)
        beta = self.beta.reshape(pshape)
        if train:
            mean = x.mean(axis=axes, keepdims=True)
            var = x.var(axis=axes, keepdims=True)
            m = x.size // self.n_features
            unbias = m / (m - 1) if m > 1 else 1.0
            self.running_mean += BN_MOMENTUM * (mean.reshape(-1) - self.running_mean)
            self.running_var += BN_MOMENTUM * (unbias * var.reshape(-1) - self.running_var)
        else:
            mean = self.running_mean.reshape(pshape)
            var = self.running_var.reshape(pshape)
        inv_std = 1.0 / np.sqrt(var + BN_EPS)
        xhat = (x - mean) * inv_std
        if train:
            self._cache = (xhat, inv_std, axes, pshape, m)
        return gamma * xhat + beta

    def backward(self, grad):
        if self._cache is None:
            raise RuntimeError("BatchNorm.backward requires a preceding train-mode forward")
        xhat, inv_std, axes, pshape, m = self._cache
        self.dgamma += np.sum(grad * xhat, axis=axes)
        self.dbeta += np.sum(grad, axis=axes)
        dxhat = grad * self.gamma.reshape(pshape)
        term = (
            m * dxhat
            - np.sum(dxhat, axis=axes, keepdims=True)
            - xhat * np.sum(dxhat * xhat, axis=axes, keepdims=True)
        )
        return inv_std / m * term

    def params(self):
        return [self.gamma, self.beta]

    def grads(self):
        return [self.dgamma, self.dbeta]

    def state(self):
        return [self.gamma, self.beta, self.running_mean, self.running_var]


class Dropout(Layer):
    """Inverted dropout: scale the kept activations by 1/(1-rate) so the
    eval pass is the identity."""

    def __init__(self, rate: float):
        if not (0.0 <= rate < 1.0):
            raise ValueError(f"dropout rate must lie in [0, 1), got {rate!r}")
        self.rate = rate
        self._mask: "np.ndarray | None" = None

    def forward(self, x, train, rng=None):
        if not train or self.rate == 0.0:
            self._mask = None
            return x
        if rng is not None:
            self._mask = (rng.random(x.shape) >= self.rate) / (1.0 - self.rate)
        elif self._mask is None:
            raise RuntimeError("Dropout: train-mode forward with rng=None but no cached mask to reuse")
        elif self._mask.shape != x.shape:
            raise ShapeError(
                f"Dropout: cached mask shape {self._mask.shape} does not match input {x.shape}"
            )
        return x * self._mask

    def backward(self, grad):
        if self._mask is None:
            return grad
        return grad * self._mask


class LeakyReLU(Layer):
    def __init__(self, slope: float):
        if not (0.0 <= slope < 1.0):
            raise ValueError(f"slope must lie in [0, 1), got {slope!r}")
        self.slope = slope
        self._positive: "np.ndarray | None" = None

    def forward(self, x, train, rng=None):
        self._positive = x >= 0
        return np.where(self._positive, x, self.slope * x)

    def backward(self, grad):
        return np.where(self._positive, grad, self.slope * grad)


class Conv2d(Layer):
    """2-d convolution, stride 1, zero 'same' padding, odd kernel.

    Input (B, C_in, H, W) -> output (B, C_out, H, W).
    """

    def __init__(self, in_channels: int, out_channels: int, kernel: "tuple[int, int]",
                 rng: np.random.Generator):
        kh, kw = kernel
        if in_channels < 1 or out_channels < 1:
            raise ValueError(f"channel counts must be positive, got ({in_channels}, {out_channels})")
        if kh < 1 or kw < 1 or kh % 2 == 0 or kw % 2 == 0:
            raise ValueError(f"kernel sides must be odd and positive, got {kernel!r}")
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel = (kh, kw)
        scale = np.sqrt(2.0 / (in_channels * kh * kw))
        self.w = rng.normal(0.0, scale, size=(out_channels, in_channels, kh, kw))
        self.b = np.zeros(out_channels)
        self.dw = np.zeros_like(self.w)
        self.db = np.zeros_like(self.b)
        self._xp: "np.ndarray | None" = None

    def forward(self, x, train, rng=None):
        kh, kw = self.kernel
        ph, pw = kh // 2, kw // 2
        xp = np.pad(x, ((0, 0), (0, 0), (ph, ph), (pw, pw)))
        windows = sliding_window_view(xp, (kh, kw), axis=(2, 3))  # (B,C,H,W,kh,kw)
        self._xp = xp
        out = np.einsum("bchwij,ocij->bohw", windows, self.w, optimize=True)
        return out + self.b[np.newaxis, :, np.newaxis, np.newaxis]

    def backward(self, grad):
        kh, kw = self.kernel
        ph, pw = kh // 2, kw // 2
        h, w = grad.shape[2], grad.shape[3]
        windows = sliding_window_view(self._xp, (kh, kw), axis=(2, 3))
        self.dw += np.einsum("bohw,bchwij->ocij", grad, windows, optimize=True)
        self.db += grad.sum(axis=(0, 2, 3))
        dxp = np.zeros_like(self._xp)
        for di in range(kh):
            for dj in range(kw):
                dxp[:, :, di : di + h, dj : dj + w] += np.einsum(
                    "bohw,oc->bchw", grad, self.w[:, :, di, dj], optimize=True
                )
        return dxp[:, :, ph : ph + h, pw : pw + w]

    def params(self):
        return [self.w, self.b]

    def grads(self):
        return [self.dw, self.db]

    def weight_count(self):
        kh, kw = self.kernel
        return kh * kw * self.out_channels


class MaxPool2d(Layer):
    """Max pooling, stride 1, 'same' extent via -inf padding, odd window.

    Ties inside a window resolve to the lowest flat offset, so the backward
    routing is deterministic.
    """

    def __init__(self, kernel: "tuple[int, int]"):
        kh, kw = kernel
        if kh < 1 or kw < 1 or kh % 2 == 0 or kw % 2 == 0:
            raise ValueError(f"kernel sides must be odd and positive, got {kernel!r}")
        self.kernel = (kh, kw)
        self._idx: "np.ndarray | None" = None
        self._padded_shape: "tuple[int, ...] | None" = None

    def forward(self, x, train, rng=None):
        kh, kw = self.kernel
        ph, pw = kh // 2, kw // 2
        xp = np.pad(x, ((0, 0), (0, 0), (ph, ph), (pw, pw)), constant_values=-np.inf)
        windows = sliding_window_view(xp, (kh, kw), axis=(2, 3))
        flat = windows.reshape(*windows.shape[:4], kh * kw)
        self._idx = np.argmax(flat, axis=-1)
        self._padded_shape = xp.shape
        return np.take_along_axis(flat, self._idx[..., np.newaxis], axis=-1)[..., 0]

    def backward(self, grad):
        kh, kw = self.kernel
        ph, pw = kh // 2, kw // 2
        h, w = grad.shape[2], grad.shape[3]
        dxp = np.zeros(self._padded_shape)
        for m in range(kh * kw):
            di, dj = divmod(m, kw)
            dxp[:, :, di : di + h, dj : dj + w] += grad * (self._idx == m)
        return dxp[:, :, ph : ph + h, pw : pw + w]


class Flatten(Layer):
    def __init__(self):
        self._shape: "tuple[int, ...] | None" = None

    def forward(self, x, train, rng=None):
        self._shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, grad):
        return grad.reshape(self._shape)
