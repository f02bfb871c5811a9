"""
CNN ship detection — a 6-layer half-precision inference engine.

Topology (128×128×3 input, 125,425 parameters):
    conv3×3(8, valid) + ReLU → maxpool 5×5/5 → conv3×3(16, valid) + ReLU
    → maxpool 2×2/2 → dense(64) + ReLU → dense(1) + sigmoid

In fp16 mode weights and activations are stored as float16; each layer
accumulates in float32 and rounds its output back to float16. The fp32 mode
runs the same weights in float32 and serves as the reference.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, Literal, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from app.errors import GeometryError

logger = logging.getLogger(__name__)

PATCH = 128
LAYERS = ("conv1", "pool1", "conv2", "pool2", "dense1", "dense2")
TENSOR_SHAPES: Tuple[Tuple[str, Tuple[int, ...]], ...] = (
    ("conv1.weight", (3, 3, 3, 8)),
    ("conv1.bias", (8,)),
    ("conv2.weight", (3, 3, 8, 16)),
    ("conv2.bias", (16,)),
    ("dense1.weight", (11 * 11 * 16, 64)),
    ("dense1.bias", (64,)),
    ("dense2.weight", (64, 1)),
    ("dense2.bias", (1,)),
)

Precision = Literal["fp16", "fp32"]


@dataclass(frozen=True, eq=False)
class CnnModel:
    weights: Dict[str, np.ndarray]

    def __post_init__(self):
        weights = {}
        for name, shape in TENSOR_SHAPES:
            if name not in self.weights:
                raise GeometryError(f"Missing tensor '{name}'")
            tensor = np.asarray(self.weights[name], dtype=np.float16)
            if tensor.shape != shape:
                raise GeometryError(f"Tensor '{name}' has shape {tensor.shape}, expected {shape}")
            weights[name] = tensor
        object.__setattr__(self, "weights", weights)

    @property
    def layer_count(self) -> int:
        return len(LAYERS)

    @property
    def parameter_count(self) -> int:
        return sum(int(t.size) for t in self.weights.values())

    @classmethod
    def from_seed(cls, seed: int) -> "CnnModel":
        """He-uniform weights, small random biases; float32 draws converted to float16."""
        rng = np.random.default_rng(seed)
        weights = {}
        for name, shape in TENSOR_SHAPES:
            if name.endswith(".weight"):
                fan_in = int(np.prod(shape[:-1]))
                limit = np.sqrt(6.0 / fan_in)
                weights[name] = rng.uniform(-limit, limit, size=shape).astype(np.float32)
            else:
                weights[name] = rng.uniform(-0.05, 0.05, size=shape).astype(np.float32)
        return cls({k: v.astype(np.float16) for k, v in weights.items()})


def _conv3x3(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    windows = sliding_window_view(x, (3, 3), axis=(0, 1))  # (H-2, W-2, C, 3, 3)
    cols = windows.transpose(0, 1, 3, 4, 2).reshape(windows.shape[0], windows.shape[1], -1)
    return cols @ w.reshape(-1, w.shape[-1]) + b


def _maxpool(x: np.ndarray, k: int) -> np.ndarray:
    h, w, c = (x.shape[0] // k) * k, (x.shape[1] // k) * k, x.shape[2]
    return x[:h, :w].reshape(h // k, k, w // k, k, c).max(axis=(1, 3))


def _sigmoid(z: np.ndarray) -> np.ndarray:
    z = z.astype(np.float64)
    return np.where(z >= 0, 1.0 / (1.0 + np.exp(-np.abs(z))), np.exp(-np.abs(z)) / (1.0 + np.exp(-np.abs(z))))


def infer_patch(model: CnnModel, patch: np.ndarray, precision: Precision = "fp16") -> float:
    """Ship probability for one 128×128×3 patch of 16-bit-per-channel pixels."""
    if patch.shape != (PATCH, PATCH, 3):
        raise GeometryError(f"Patch must be {PATCH}x{PATCH}x3, got {patch.shape}")
    store = np.float16 if precision == "fp16" else np.float32
    w = {k: v.astype(np.float32) for k, v in model.weights.items()}

    def layer(values: np.ndarray) -> np.ndarray:
        return values.astype(store).astype(np.float32)

    x = layer(patch.astype(np.float32) / 65535.0)
    x = layer(np.maximum(_conv3x3(x, w["conv1.weight"], w["conv1.bias"]), 0))
    x = _maxpool(x, 5)
    x = layer(np.maximum(_conv3x3(x, w["conv2.weight"], w["conv2.bias"]), 0))
    x = _maxpool(x, 2)
    x = layer(np.maximum(x.reshape(-1) @ w["dense1.weight"] + w["dense1.bias"], 0))
    logit = layer(x @ w["dense2.weight"] + w["dense2.bias"])
    return float(layer(_sigmoid(logit))[0])


def split_patches(image: np.ndarray) -> np.ndarray:
    """Row-major grid of 128×128 patches: (n_patches, 128, 128, 3)."""
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[2] != 3:
        raise GeometryError(f"Expected an RGB image (H, W, 3), got {image.shape}")
    h, w = image.shape[:2]
    if h % PATCH or w % PATCH:
        raise GeometryError(f"Image {w}x{h} is not a whole grid of {PATCH}-pixel patches")
    grid = image.reshape(h // PATCH, PATCH, w // PATCH, PATCH, 3).swapaxes(1, 2)
    return grid.reshape(-1, PATCH, PATCH, 3)


def cnn_ship_detect(image: np.ndarray, model: CnnModel, precision: Precision = "fp16") -> np.ndarray:
    """One score per patch (64 for a 1024×1024 image), row-major."""
    patches = split_patches(image)
    scores = np.array([infer_patch(model, p, precision) for p in patches], dtype=np.float64)
    logger.debug(f"Scored {len(patches)} patches at {precision}")
    return scores


def scores_to_pixels(scores: np.ndarray) -> np.ndarray:
    """16-bit wire encoding of scores for the LCD return path."""
    return np.rint(np.clip(scores, 0.0, 1.0) * 65535).astype(np.uint32)
