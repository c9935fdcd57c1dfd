"""Array checkpoint format.

A checkpoint directory holds two files: `manifest.json`, listing each array's
name, shape, dtype and byte offset, and `arrays.bin`, every array's raw
little-endian bytes concatenated in manifest order. Loading reads the blob
once and slices it by offset, so a save/load round trip is bit-exact.

Both files are written to a temporary name first and renamed into place, so
an interrupted save never leaves a manifest pointing into a truncated blob.
"""

import json
from pathlib import Path
from typing import Dict, Mapping, Union

import numpy as np
import torch
from torch import nn

from .errors import ContractError

MANIFEST_NAME = "manifest.json"
BLOB_NAME = "arrays.bin"
FORMAT_VERSION = 1

Array = Union[np.ndarray, torch.Tensor]


def _to_numpy(value: Array) -> np.ndarray:
    if isinstance(value, torch.Tensor):
        value = value.detach().cpu().numpy()
    array = np.ascontiguousarray(value)
    return array.astype(array.dtype.newbyteorder("<"), copy=False)


def save_arrays(directory: Path, arrays: Mapping[str, Array]) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    entries = []
    chunks = []
    offset = 0
    for name, value in arrays.items():
        array = _to_numpy(value)
        raw = array.tobytes(order="C")
        entries.append(
            {
                "name": name,
                "shape": list(array.shape),
                "dtype": array.dtype.str,
                "offset": offset,
                "nbytes": len(raw),
            }
        )
        chunks.append(raw)
        offset += len(raw)

    blob_path = directory / BLOB_NAME
    tmp_blob = blob_path.with_suffix(".bin.tmp")
    tmp_blob.write_bytes(b"".join(chunks))
    tmp_blob.replace(blob_path)

    manifest_path = directory / MANIFEST_NAME
    tmp_manifest = manifest_path.with_suffix(".json.tmp")
    with open(tmp_manifest, "w") as f:
        json.dump({"format_version": FORMAT_VERSION, "arrays": entries}, f, indent=2)
    tmp_manifest.replace(manifest_path)
    return directory


def load_arrays(directory: Path) -> Dict[str, np.ndarray]:
    directory = Path(directory)
    manifest_path = directory / MANIFEST_NAME
    if not manifest_path.exists():
        raise FileNotFoundError(f"No checkpoint manifest at {manifest_path}")
    with open(manifest_path) as f:
        manifest = json.load(f)
    blob = (directory / BLOB_NAME).read_bytes()

    arrays: Dict[str, np.ndarray] = {}
    for entry in manifest["arrays"]:
        dtype = np.dtype(entry["dtype"])
        count = int(np.prod(entry["shape"], dtype=np.int64))
        end = entry["offset"] + count * dtype.itemsize
        if end > len(blob) or count * dtype.itemsize != entry["nbytes"]:
            raise ContractError(f"Checkpoint entry {entry['name']!r} does not fit the blob in {directory}")
        array = np.frombuffer(blob, dtype=dtype, count=count, offset=entry["offset"])
        arrays[entry["name"]] = array.reshape(entry["shape"]).copy()
    return arrays


def module_arrays(module: nn.Module, prefix: str = "") -> Dict[str, np.ndarray]:
    return {f"{prefix}{name}": _to_numpy(value) for name, value in module.state_dict().items()}


def load_module_arrays(module: nn.Module, arrays: Mapping[str, np.ndarray], prefix: str = "") -> nn.Module:
    state = {
        name[len(prefix):]: torch.from_numpy(np.array(value))
        for name, value in arrays.items()
        if name.startswith(prefix)
    }
    module.load_state_dict(state, strict=True)
    return module
