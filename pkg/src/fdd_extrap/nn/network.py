"""Network specifications, the two standard architectures, and the
complex <-> real tensor packing.

A ``NetworkSpec`` is a declarative layer list plus an input shape; shapes
for every layer are derived by walking the chain, so mismatches are
configuration errors at build time rather than runtime surprises.
``param_count`` applies the documented weight accounting (dense in*out,
convolution kh*kw*out_channels, nothing else) and therefore depends only on
the spec.

Two builders cover the extrapolation networks:

* ``build_mlp(input_dim)`` — a deep linear trunk for raw channel matrices:
  an input layer into width 512, nineteen 512-wide layers, a 512->1024->512
  bottleneck-in-reverse pair, and a linear readout back to the input
  dimension.  Every hidden layer is followed by batch normalization and
  dropout 0.1; there are no activations, which suits a target that is a
  (near-)linear map of the input.

* ``build_cnn(q, l)`` — for per-cluster gain images of shape (2, q, l):
  four blocks of [5x5 conv with 64 channels, batch norm, leaky ReLU(0.01),
  3x3 stride-1 max pool], then dense layers 24, 654, 476, 122, 256 (each
  with batch norm and dropout 0.1) and a linear readout of size 2*q*l.

With the weight accounting above these give exactly

    mlp: 1024 * d + 19 * 512^2 + 2 * 512 * 1024   (d = input_dim)
    cnn: 422704 + 2048 * q * l
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ..exceptions import ConfigError, ShapeError
from .layers import BatchNorm, Conv2d, Dense, Dropout, Flatten, Layer, LeakyReLU, MaxPool2d

__all__ = [
    "LayerSpec",
    "NetworkSpec",
    "Network",
    "param_count",
    "build_mlp",
    "build_cnn",
    "complex_to_real",
    "real_to_complex",
    "MLP_HIDDEN_WIDTHS",
    "CNN_DENSE_WIDTHS",
    "DROPOUT_RATE",
    "LEAKY_SLOPE",
    "CONV_CHANNELS",
    "CONV_KERNEL",
    "POOL_KERNEL",
]

DROPOUT_RATE = 0.1
LEAKY_SLOPE = 0.01
CONV_CHANNELS = 64
CONV_KERNEL = (5, 5)
POOL_KERNEL = (3, 3)
MLP_HIDDEN_WIDTHS = (512,) * 20 + (1024, 512)
CNN_DENSE_WIDTHS = (24, 654, 476, 122, 256)

_KINDS = ("dense", "batch_norm", "dropout", "leaky_relu", "conv2d", "max_pool", "flatten")


@dataclass(frozen=True)
class LayerSpec:
    """One layer of a network; only the fields relevant to ``kind`` are set."""

    kind: str
    units: "int | None" = None  # dense
    rate: "float | None" = None  # dropout
    slope: "float | None" = None  # leaky_relu
    channels: "int | None" = None  # conv2d
    kernel: "tuple[int, int] | None" = None  # conv2d / max_pool

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ConfigError(f"unknown layer kind {self.kind!r}")
        if self.kernel is not None:
            object.__setattr__(self, "kernel", tuple(int(k) for k in self.kernel))

    def to_obj(self) -> dict:
        obj = {k: v for k, v in asdict(self).items() if v is not None}
        if "kernel" in obj:
            obj["kernel"] = list(obj["kernel"])
        return obj

    @classmethod
    def from_obj(cls, obj: dict) -> "LayerSpec":
        fields = dict(obj)
        if "kernel" in fields:
            fields["kernel"] = tuple(fields["kernel"])
        return cls(**fields)


@dataclass(frozen=True)
class NetworkSpec:
    input_shape: tuple[int, ...]
    layers: tuple[LayerSpec, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "input_shape", tuple(int(d) for d in self.input_shape))
        object.__setattr__(self, "layers", tuple(self.layers))
        if len(self.input_shape) not in (1, 3) or any(d < 1 for d in self.input_shape):
            raise ConfigError(
                f"input_shape must be (features,) or (channels, h, w) of positive sizes, "
                f"got {self.input_shape!r}"
            )
        layer_shapes(self)  # validates the whole chain

    @property
    def output_shape(self) -> tuple[int, ...]:
        return layer_shapes(self)[-1]


def _shape_after(spec: LayerSpec, shape: tuple[int, ...], index: int) -> tuple[int, ...]:
    kind = spec.kind
    if kind == "dense":
        if len(shape) != 1:
            raise ConfigError(f"layer {index} (dense): needs a flat input, got shape {shape}")
        if spec.units is None or spec.units < 1:
            raise ConfigError(f"layer {index} (dense): units must be positive, got {spec.units!r}")
        return (spec.units,)
    if kind in ("batch_norm", "dropout", "leaky_relu"):
        return shape
    if kind == "conv2d":
        if len(shape) != 3:
            raise ConfigError(f"layer {index} (conv2d): needs (c, h, w) input, got shape {shape}")
        if spec.channels is None or spec.channels < 1 or spec.kernel is None:
            raise ConfigError(f"layer {index} (conv2d): channels and kernel are required")
        return (spec.channels, shape[1], shape[2])
    if kind == "max_pool":
        if len(shape) != 3:
            raise ConfigError(f"layer {index} (max_pool): needs (c, h, w) input, got shape {shape}")
        if spec.kernel is None:
            raise ConfigError(f"layer {index} (max_pool): kernel is required")
        return shape
    if kind == "flatten":
        return (int(np.prod(shape)),)
    raise ConfigError(f"layer {index}: unknown kind {kind!r}")


def layer_shapes(spec: NetworkSpec) -> "list[tuple[int, ...]]":
    """Shapes at every interface: entry i is the input to layer i, the last
    entry is the output shape."""
    shapes = [spec.input_shape]
    for i, layer in enumerate(spec.layers):
        shapes.append(_shape_after(layer, shapes[-1], i))
    return shapes


def param_count(spec: NetworkSpec) -> int:
    """Learnable weight count under the documented accounting."""
    total = 0
    shapes = layer_shapes(spec)
    for layer, in_shape in zip(spec.layers, shapes):
        if layer.kind == "dense":
            total += in_shape[0] * layer.units
        elif layer.kind == "conv2d":
            kh, kw = layer.kernel
            total += kh * kw * layer.channels
    return total


def _instantiate(spec: LayerSpec, in_shape: tuple[int, ...], rng: np.random.Generator) -> Layer:
    if spec.kind == "dense":
        return Dense(in_shape[0], spec.units, rng)
    if spec.kind == "batch_norm":
        n_features = in_shape[0]  # feature dim for flat input, channels for image input
        return BatchNorm(n_features)
    if spec.kind == "dropout":
        return Dropout(spec.rate if spec.rate is not None else DROPOUT_RATE)
    if spec.kind == "leaky_relu":
        return LeakyReLU(spec.slope if spec.slope is not None else LEAKY_SLOPE)
    if spec.kind == "conv2d":
        return Conv2d(in_shape[0], spec.channels, spec.kernel, rng)
    if spec.kind == "max_pool":
        return MaxPool2d(spec.kernel)
    if spec.kind == "flatten":
        return Flatten()
    raise ConfigError(f"unknown layer kind {spec.kind!r}")


class Network:
    """An instantiated spec: layer objects plus forward/backward plumbing."""

    def __init__(self, spec: NetworkSpec, layers: "list[Layer]"):
        self.spec = spec
        self.layers = layers
        self._shapes = layer_shapes(spec)

    @classmethod
    def build(cls, spec: NetworkSpec, seed: int) -> "Network":
        rng = np.random.default_rng(seed)
        shapes = layer_shapes(spec)
        layers = [_instantiate(layer, shapes[i], rng) for i, layer in enumerate(spec.layers)]
        return cls(spec, layers)

    @property
    def input_shape(self) -> tuple[int, ...]:
        return self.spec.input_shape

    @property
    def output_shape(self) -> tuple[int, ...]:
        return self._shapes[-1]

    def forward(self, x: np.ndarray, train: bool = False,
                rng: "np.random.Generator | None" = None) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != len(self.input_shape) + 1 or x.shape[1:] != self.input_shape:
            raise ShapeError(
                f"network input: expected (batch, {', '.join(map(str, self.input_shape))}), "
                f"got shape {x.shape}"
            )
        for i, layer in enumerate(self.layers):
            expected = self._shapes[i]
            if x.shape[1:] != expected:
                raise ShapeError(
                    f"layer {i} ({self.spec.layers[i].kind}): expected input shape "
                    f"(batch, {', '.join(map(str, expected))}), got {x.shape}"
                )
            x = layer.forward(x, train, rng)
        return x

    def backward(self, grad: np.ndarray) -> np.ndarray:
        for layer in reversed(self.layers):
            grad = layer.backward(grad)
        return grad

    def params(self) -> "list[np.ndarray]":
        return [p for layer in self.layers for p in layer.params()]

    def grads(self) -> "list[np.ndarray]":
        return [g for layer in self.layers for g in layer.grads()]

    def zero_grads(self) -> None:
        for g in self.grads():
            g[...] = 0.0

    def weight_count(self) -> int:
        return sum(layer.weight_count() for layer in self.layers)

    def state_arrays(self) -> "list[np.ndarray]":
        return [a for layer in self.layers for a in layer.state()]

    def load_state(self, arrays: "list[np.ndarray]") -> None:
        cursor = 0
        for layer in self.layers:
            n = len(layer.state())
            layer.load_state(arrays[cursor : cursor + n])
            cursor += n
        if cursor != len(arrays):
            raise ValueError(f"expected {cursor} state arrays, got {len(arrays)}")


def _hidden_block(units: int) -> "list[LayerSpec]":
    return [
        LayerSpec(kind="dense", units=units),
        LayerSpec(kind="batch_norm"),
        LayerSpec(kind="dropout", rate=DROPOUT_RATE),
    ]


def build_mlp(input_dim: int) -> NetworkSpec:
    """Deep linear network mapping a flat real channel vector to one of the
    same size; see the module docstring for the layout."""
    if input_dim < 1:
        raise ConfigError(f"input_dim must be positive, got {input_dim!r}")
    layers: "list[LayerSpec]" = []
    for width in MLP_HIDDEN_WIDTHS:
        layers.extend(_hidden_block(width))
    layers.append(LayerSpec(kind="dense", units=input_dim))
    return NetworkSpec(input_shape=(input_dim,), layers=tuple(layers))


def build_cnn(q: int, l: int) -> NetworkSpec:
    """Convolutional network mapping a (2, q, l) gain image to a flat vector
    of 2*q*l downlink gains; see the module docstring for the layout."""
    if q < 1 or l < 1:
        raise ConfigError(f"q and l must be positive, got ({q!r}, {l!r})")
    layers: "list[LayerSpec]" = []
    for _ in range(4):
        layers.extend(
            [
                LayerSpec(kind="conv2d", channels=CONV_CHANNELS, kernel=CONV_KERNEL),
                LayerSpec(kind="batch_norm"),
                LayerSpec(kind="leaky_relu", slope=LEAKY_SLOPE),
                LayerSpec(kind="max_pool", kernel=POOL_KERNEL),
            ]
        )
    layers.append(LayerSpec(kind="flatten"))
    for width in CNN_DENSE_WIDTHS:
        layers.extend(_hidden_block(width))
    layers.append(LayerSpec(kind="dense", units=2 * q * l))
    return NetworkSpec(input_shape=(2, q, l), layers=tuple(layers))


def complex_to_real(x: np.ndarray) -> np.ndarray:
    """Pack a complex array of shape s into a real array of shape (2, *s):
    real part first, imaginary part second."""
    x = np.asarray(x, dtype=np.complex128)
    return np.stack([x.real, x.imag])


def real_to_complex(x: np.ndarray) -> np.ndarray:
    """Inverse of ``complex_to_real``."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim < 1 or x.shape[0] != 2:
        raise ShapeError(f"expected a leading axis of size 2, got shape {x.shape}")
    return x[0] + 1j * x[1]
