"""Shared detector plumbing: the model registry and the serialized format.

Every fitted model is an immutable dataclass with a ``score`` method
returning raw OOD scores (higher = more OOD).  Models serialize to a
versioned binary blob -- magic string, JSON header with kind tag and
array manifest, then flat little-endian arrays -- whose size feeds the
benchmark's memory metric.
"""

import json
import struct

import numpy as np

__all__ = ["register_model", "serialize_model", "deserialize_model", "MODEL_REGISTRY"]

_MAGIC = b"ODBM\x01"

MODEL_REGISTRY: dict[str, type] = {}


def register_model(cls):
    """Class decorator adding a model kind to the (de)serialization registry."""
    kind = getattr(cls, "kind", None)
    if not isinstance(kind, str):
        raise TypeError(f"{cls.__name__} must define a string 'kind' attribute")
    MODEL_REGISTRY[kind] = cls
    return cls


def serialize_model(model) -> bytes:
    """Pack a fitted model into the versioned binary blob."""
    arrays = {k: np.ascontiguousarray(v) for k, v in model._arrays().items()}
    manifest = [
        {"name": k, "dtype": str(a.dtype), "shape": list(a.shape)} for k, a in arrays.items()
    ]
    header = json.dumps(
        {"kind": model.kind, "scalars": model._scalars(), "arrays": manifest},
        sort_keys=True,
    ).encode("utf-8")
    blob = bytearray(_MAGIC)
    blob += struct.pack("<I", len(header))
    blob += header
    for item in manifest:
        blob += arrays[item["name"]].astype(item["dtype"]).tobytes(order="C")
    return bytes(blob)


def deserialize_model(data: bytes):
    """Rebuild a model from :func:`serialize_model` output."""
    if data[: len(_MAGIC)] != _MAGIC:
        raise ValueError("not a serialized model blob (bad magic)")
    off = len(_MAGIC)
    (hlen,) = struct.unpack_from("<I", data, off)
    off += 4
    header = json.loads(data[off : off + hlen].decode("utf-8"))
    off += hlen
    arrays = {}
    for item in header["arrays"]:
        dtype = np.dtype(item["dtype"])
        shape = tuple(item["shape"])
        count = int(np.prod(shape, dtype=np.int64)) if shape else 1
        arr = np.frombuffer(data, dtype=dtype, count=count, offset=off).reshape(shape)
        arrays[item["name"]] = arr.copy()
        off += arr.nbytes
    kind = header["kind"]
    if kind not in MODEL_REGISTRY:
        raise ValueError(f"unknown model kind {kind!r}")
    return MODEL_REGISTRY[kind]._rebuild(arrays, header["scalars"])


def standardizer_arrays(std) -> dict[str, np.ndarray]:
    return {"std_mean": std.mean, "std_scale": std.scale}


def standardizer_from_arrays(arrays):
    from ..data import Standardizer

    return Standardizer(mean=arrays["std_mean"], scale=arrays["std_scale"])
