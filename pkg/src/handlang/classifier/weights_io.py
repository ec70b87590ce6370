"""Binary weight files: magic, schema version, then named float32 tensors.

Layout (all integers little-endian):
    magic       6 bytes   b"HLWTS\\0"
    version     uint16    format schema (currently 1)
    tensors     uint32    tensor count
    per tensor:
        name_len  uint16, name utf-8 bytes
        ndim      uint8,  dims uint32 * ndim
        payload   float32 * prod(dims), little-endian

Saving then loading reproduces every parameter bit-exactly; loading
into a model whose tensor names or shapes differ fails loudly.
"""

from __future__ import annotations

import struct

import numpy as np

MAGIC = b"HLWTS\x00"
FORMAT_VERSION = 1


class IncompatibleWeightsError(ValueError):
    """Weight file malformed or shaped differently from the target model."""


def save_weights(model, path: str) -> None:
    params = model.params()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<HI", FORMAT_VERSION, len(params)))
        for name in sorted(params):
            tensor = np.ascontiguousarray(params[name], dtype="<f4")
            encoded = name.encode("utf-8")
            fh.write(struct.pack("<H", len(encoded)))
            fh.write(encoded)
            fh.write(struct.pack("<B", tensor.ndim))
            fh.write(struct.pack(f"<{tensor.ndim}I", *tensor.shape))
            fh.write(tensor.tobytes())


def _read_exact(fh, count: int) -> bytes:
    data = fh.read(count)
    if len(data) != count:
        raise IncompatibleWeightsError(
            f"truncated weight file: wanted {count} bytes, got {len(data)}"
        )
    return data


def load_weights(model, path: str) -> None:
    """Load tensors into the model in place; raises on any mismatch."""
    with open(path, "rb") as fh:
        if _read_exact(fh, len(MAGIC)) != MAGIC:
            raise IncompatibleWeightsError("bad magic; not a weight file")
        version, count = struct.unpack("<HI", _read_exact(fh, 6))
        if version != FORMAT_VERSION:
            raise IncompatibleWeightsError(f"unsupported weight format version {version}")
        loaded: dict[str, np.ndarray] = {}
        for _ in range(count):
            (name_len,) = struct.unpack("<H", _read_exact(fh, 2))
            name = _read_exact(fh, name_len).decode("utf-8")
            (ndim,) = struct.unpack("<B", _read_exact(fh, 1))
            shape = struct.unpack(f"<{ndim}I", _read_exact(fh, 4 * ndim))
            size = int(np.prod(shape)) if shape else 1
            payload = _read_exact(fh, 4 * size)
            loaded[name] = np.frombuffer(payload, dtype="<f4").reshape(shape).copy()
        trailing = fh.read(1)
        if trailing:
            raise IncompatibleWeightsError("trailing bytes after last tensor")

    expected = model.params()
    if set(expected) != set(loaded):
        raise IncompatibleWeightsError(
            f"tensor names mismatch: {sorted(set(expected) ^ set(loaded))}"
        )
    for name, tensor in loaded.items():
        if tensor.shape != expected[name].shape:
            raise IncompatibleWeightsError(
                f"{name}: file shape {tensor.shape} vs model {expected[name].shape}"
            )
    model.set_params(loaded)
