"""
Binary checkpoint container.

Layout (little endian):
    8 bytes   magic b"GFRESNET"
    uint16    format version
    uint32    header length in bytes
    header    UTF-8 JSON {spec, provenance, seed, tensors: [[name, shape], ...], metadata}
    payload   float64 tensors, row-major, in order W1, b1, ..., WL, bL, Ws, bs
"""
from __future__ import annotations

import json
import logging
import struct
from typing import Optional

import numpy as np

from analytics.computation import Provenance
from gridflow.exceptions import CorruptCheckpoint, GridflowError, VersionMismatch

from .resnet import NetSpec, ResidualNet

logger = logging.getLogger(__name__)

MAGIC = b"GFRESNET"
VERSION = 1
_PREAMBLE = struct.Struct("<8sHI")


def _tensor_names(n_layers: int) -> list[str]:
    names = []
    for i in range(1, n_layers + 1):
        names.extend([f"W{i}", f"b{i}"])
    return names + ["Ws", "bs"]


def save_checkpoint(model: ResidualNet, path: str, *, metadata: Optional[dict] = None) -> None:
    tensors = model.parameters()
    header = {
        "spec": model.spec.to_dict(),
        "provenance": model.provenance.value,
        "seed": model.seed,
        "tensors": [[name, list(t.shape)] for name, t in zip(_tensor_names(len(model.weights)), tensors)],
        "metadata": metadata or {},
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as f:
        f.write(_PREAMBLE.pack(MAGIC, VERSION, len(header_bytes)))
        f.write(header_bytes)
        for t in tensors:
            f.write(np.ascontiguousarray(t, dtype="<f8").tobytes())
    logger.info(f"Saved {model.provenance.value} checkpoint to {path}")


def read_header(path: str) -> dict:
    return _read(path)[0]


def load_checkpoint(path: str) -> ResidualNet:
    header, tensors = _read(path)
    spec_raw = header["spec"]
    try:
        spec = NetSpec(
            layer_sizes=tuple(spec_raw["layer_sizes"]),
            shortcut=bool(spec_raw["shortcut"]),
            trunk_output_init=spec_raw.get("trunk_output_init", "he"),
        )
        n_layers = len(spec.layer_sizes) - 1
        return ResidualNet(
            spec=spec,
            weights=tensors[0:2 * n_layers:2],
            biases=tensors[1:2 * n_layers:2],
            Ws=tensors[-2],
            bs=tensors[-1],
            provenance=Provenance(header["provenance"]),
            seed=int(header["seed"]),
        )
    except (KeyError, TypeError, ValueError, GridflowError) as e:
        raise CorruptCheckpoint(f"{path}: inconsistent header ({e})") from e


def _read(path: str) -> tuple[dict, list[np.ndarray]]:
    with open(path, "rb") as f:
        blob = f.read()
    if len(blob) < _PREAMBLE.size:
        raise CorruptCheckpoint(f"{path}: file too short for a checkpoint")
    magic, version, header_len = _PREAMBLE.unpack_from(blob)
    if magic != MAGIC:
        raise CorruptCheckpoint(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise VersionMismatch(version, VERSION)

    start = _PREAMBLE.size
    try:
        header = json.loads(blob[start:start + header_len].decode("utf-8"))
        shapes = [tuple(shape) for _, shape in header["tensors"]]
    except (UnicodeDecodeError, json.JSONDecodeError, KeyError, ValueError) as e:
        raise CorruptCheckpoint(f"{path}: unreadable header ({e})") from e

    offset = start + header_len
    sizes = [int(np.prod(shape, dtype=np.int64)) for shape in shapes]
    if len(blob) != offset + 8 * sum(sizes):
        raise CorruptCheckpoint(f"{path}: payload has {len(blob) - offset} bytes, expected {8 * sum(sizes)}")
    tensors = []
    for shape, size in zip(shapes, sizes):
        tensors.append(np.frombuffer(blob, dtype="<f8", count=size, offset=offset).reshape(shape).astype(np.float64))
        offset += 8 * size
    return header, tensors
