"""Weight persistence: JSON manifest + f32 little-endian parameter blob."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import ShapeMismatch
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
)

_LAYER_KINDS = {
    "conv2d": Conv2D,
    "deconv2d": Deconv2D,
    "maxpool2d": MaxPool2D,
    "upsample2d": Upsample2D,
    "relu": ReLU,
    "flatten": Flatten,
    "dense": Dense,
    "softmax": Softmax,
}


def build_layer(kind: str, hyperparams: dict) -> Layer:
    return _LAYER_KINDS[kind](**hyperparams)


def save_model(model: Sequential, manifest_path, blob_path, extra: dict | None = None):
    """Write the layer manifest and concatenated f32-LE parameter blob."""
    manifest = {
        "layers": [
            {
                "kind": layer.kind,
                "hyperparams": layer.hyperparams(),
                "param_shapes": [list(p.shape) for p in layer.params()],
            }
            for layer in model.layers
        ],
    }
    if extra:
        manifest.update(extra)
    Path(manifest_path).write_text(json.dumps(manifest, indent=2) + "\n")
    with open(blob_path, "wb") as fh:
        for p in model.params():
            fh.write(np.ascontiguousarray(p, dtype="<f4").tobytes())


def load_model(manifest_path, blob_path) -> tuple[Sequential, dict]:
    manifest = json.loads(Path(manifest_path).read_text())
    layers = []
    for entry in manifest["layers"]:
        layers.append(build_layer(entry["kind"], entry["hyperparams"]))
    model = Sequential(layers)
    raw = np.fromfile(blob_path, dtype="<f4")
    offset = 0
    for layer, entry in zip(model.layers, manifest["layers"]):
        for p, shape in zip(layer.params(), entry["param_shapes"]):
            n = int(np.prod(shape))
            if offset + n > raw.size:
                raise ShapeMismatch("parameter blob shorter than manifest")
            p[...] = raw[offset : offset + n].astype(np.float64).reshape(shape)
            offset += n
    if offset != raw.size:
        raise ShapeMismatch("parameter blob longer than manifest")
    return model, manifest
