"""CNN weights on disk: one little-endian float16 blob plus a JSON manifest of tensor shapes."""

import json
from pathlib import Path
from typing import Union

import numpy as np

from app.errors import FileFormatError, GeometryError
from app.services.kernels.cnn import TENSOR_SHAPES, CnnModel

PathLike = Union[str, Path]


def write_weights(manifest_path: PathLike, model: CnnModel) -> Path:
    """Write `<name>.json` and its sibling `<name>.bin`; returns the manifest path."""
    manifest_path = Path(manifest_path)
    blob_path = manifest_path.with_suffix(".bin")
    tensors, chunks, offset = [], [], 0
    for name, shape in TENSOR_SHAPES:
        data = model.weights[name].astype("<f2").tobytes()
        tensors.append({"name": name, "shape": list(shape), "offset": offset, "nbytes": len(data)})
        chunks.append(data)
        offset += len(data)
    blob_path.write_bytes(b"".join(chunks))
    manifest = {"dtype": "float16", "byte_order": "little", "blob": blob_path.name, "tensors": tensors}
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return manifest_path


def read_weights(manifest_path: PathLike) -> CnnModel:
    manifest_path = Path(manifest_path)
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        blob = (manifest_path.parent / manifest["blob"]).read_bytes()
        weights = {}
        for entry in manifest["tensors"]:
            start, nbytes = int(entry["offset"]), int(entry["nbytes"])
            if start + nbytes > len(blob):
                raise FileFormatError(f"Tensor '{entry['name']}' runs past the end of the blob")
            values = np.frombuffer(blob[start : start + nbytes], dtype="<f2")
            weights[entry["name"]] = values.reshape(entry["shape"])
    except (OSError, KeyError, ValueError, json.JSONDecodeError) as e:
        raise FileFormatError(f"Cannot read weights from {manifest_path}: {e}") from e
    try:
        return CnnModel(weights)
    except GeometryError as e:
        raise FileFormatError(f"{manifest_path}: {e}") from e
