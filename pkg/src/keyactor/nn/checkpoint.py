"""Parameter checkpoints: flat little-endian binary + JSON manifest."""

import json
from pathlib import Path

import numpy as np

from .tensor import Tensor


def save_checkpoint(path, named_tensors: dict, seed: int | None = None) -> None:
    """Write ``<path>.bin`` (tensors concatenated in name order, float64 LE)
    and ``<path>.json`` describing names, shapes, dtype and seed."""
    path = Path(path)
    names = sorted(named_tensors)
    manifest = {"schema": "keyactor/checkpoint/v1", "dtype": "<f8", "seed": seed, "tensors": []}
    offset = 0
    with open(path.with_suffix(".bin"), "wb") as fh:
        for name in names:
            t = named_tensors[name]
            arr = np.ascontiguousarray(t.data if isinstance(t, Tensor) else t, dtype="<f8")
            fh.write(arr.tobytes())
            manifest["tensors"].append({"name": name, "shape": list(arr.shape), "offset": offset})
            offset += arr.size
    with open(path.with_suffix(".json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_checkpoint(path) -> tuple[dict, dict]:
    """Return ({name: ndarray}, manifest)."""
    path = Path(path)
    with open(path.with_suffix(".json"), "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    flat = np.fromfile(path.with_suffix(".bin"), dtype=manifest["dtype"])
    out = {}
    for entry in manifest["tensors"]:
        shape = tuple(entry["shape"])
        size = int(np.prod(shape)) if shape else 1
        out[entry["name"]] = flat[entry["offset"] : entry["offset"] + size].reshape(shape).astype(np.float64)
    return out, manifest
