"""Model files: one ``.npz`` holding the spec, all layer state, the input
standardizer, and free-form metadata.

Layout:

* ``header`` — a JSON string (uint8 bytes) with ``format_version``, the
  network spec, the builder seed, and ``meta``;
* ``state_0000`` ... — every layer state array in network order
  (parameters plus batch-norm running statistics);
* ``std_mean`` / ``std_std`` — the input standardizer.

Loading rebuilds the network from the spec and overwrites its state, so a
round trip reproduces inference bit-for-bit.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..exceptions import ConfigError
from .network import LayerSpec, Network, NetworkSpec
from .training import Standardizer

__all__ = ["MODEL_FORMAT_VERSION", "save_model", "load_model"]

MODEL_FORMAT_VERSION = 1


def save_model(path: "Path | str", network: Network, standardizer: Standardizer,
               meta: "dict | None" = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = {
        "format_version": MODEL_FORMAT_VERSION,
        "input_shape": list(network.spec.input_shape),
        "layers": [layer.to_obj() for layer in network.spec.layers],
        "meta": meta or {},
    }
    arrays = {
        f"state_{i:04d}": a for i, a in enumerate(network.state_arrays())
    }
    np.savez(
        path,
        header=np.frombuffer(json.dumps(header, sort_keys=True).encode("utf-8"), dtype=np.uint8),
        std_mean=standardizer.mean,
        std_std=standardizer.std,
        **arrays,
    )
    return path


def load_model(path: "Path | str") -> tuple[Network, Standardizer, dict]:
    with np.load(path) as bundle:
        if "header" not in bundle:
            raise ConfigError(f"{path}: not a model file (no header)")
        header = json.loads(bytes(bundle["header"].tolist()).decode("utf-8"))
        if header.get("format_version") != MODEL_FORMAT_VERSION:
            raise ConfigError(
                f"{path}: unsupported model format_version {header.get('format_version')!r}"
            )
        spec = NetworkSpec(
            input_shape=tuple(header["input_shape"]),
            layers=tuple(LayerSpec.from_obj(obj) for obj in header["layers"]),
        )
        network = Network.build(spec, seed=0)
        state_keys = sorted(k for k in bundle.files if k.startswith("state_"))
        network.load_state([bundle[k] for k in state_keys])
        standardizer = Standardizer(mean=bundle["std_mean"], std=bundle["std_std"])
    return network, standardizer, header.get("meta", {})
