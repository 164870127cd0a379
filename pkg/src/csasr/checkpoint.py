"""Flat binary container for named float64 arrays.

Used for model checkpoints and cached feature matrices.  Layout (all
integers little-endian, no alignment padding):

    magic   4 bytes  b"CSW1"
    version u32      container format version, currently 1
    count   u32      number of entries
    entry*  repeated count times:
        name_len u32
        name     name_len bytes, UTF-8
        ndim     u32
        dims     ndim * u64
        values   prod(dims) * f64, little-endian, C order

Entries are written sorted by name so identical parameter sets produce
byte-identical files.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"CSW1"
VERSION = 1

__all__ = ["save_arrays", "load_arrays", "MAGIC", "VERSION"]


def save_arrays(path, arrays):
    """Write a mapping of name -> array to ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", VERSION, len(arrays)))
        for name in sorted(arrays):
            # note: tobytes() always emits C order; ascontiguousarray would
            # promote 0-d arrays to 1-d and lose the shape
            arr = np.asarray(arrays[name], dtype="<f8")
            raw_name = name.encode("utf-8")
            fh.write(struct.pack("<I", len(raw_name)))
            fh.write(raw_name)
            fh.write(struct.pack("<I", arr.ndim))
            for dim in arr.shape:
                fh.write(struct.pack("<Q", dim))
            fh.write(arr.tobytes())


def load_arrays(path):
    """Read a container written by :func:`save_arrays`; returns name -> array."""
    path = Path(path)
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
        version, count = struct.unpack("<II", fh.read(8))
        if version != VERSION:
            raise ValueError(f"{path}: unsupported container version {version}")
        out = {}
        for _ in range(count):
            (name_len,) = struct.unpack("<I", fh.read(4))
            name = fh.read(name_len).decode("utf-8")
            (ndim,) = struct.unpack("<I", fh.read(4))
            dims = struct.unpack(f"<{ndim}Q", fh.read(8 * ndim)) if ndim else ()
            n = int(np.prod(dims)) if dims else 1
            values = np.frombuffer(fh.read(8 * n), dtype="<f8").astype(np.float64)
            out[name] = values.reshape(dims)
        trailing = fh.read(1)
        if trailing:
            raise ValueError(f"{path}: trailing bytes after {count} entries")
    return out
