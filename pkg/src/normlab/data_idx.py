"""Reader for the IDX binary format (big-endian sizes, magic header).

Layout: two zero bytes, a dtype code byte, a dimension-count byte, then
one big-endian uint32 per dimension, then the raw data. Only the unsigned
byte dtype (0x08) is supported, which covers the common image/label files.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .exceptions import ConfigurationError, DataFormatError

DTYPE_UBYTE = 0x08


def _read_header(fh, path, expected_ndim):
    head = fh.read(4)
    if len(head) != 4:
        raise DataFormatError(f"{path}: truncated IDX header")
    zero0, zero1, dtype, ndim = struct.unpack(">BBBB", head)
    if zero0 != 0 or zero1 != 0:
        raise DataFormatError(f"{path}: bad IDX magic number {head[:2].hex()}")
    if dtype != DTYPE_UBYTE:
        raise DataFormatError(f"{path}: unsupported IDX dtype code 0x{dtype:02x}")
    if ndim != expected_ndim:
        raise DataFormatError(f"{path}: expected {expected_ndim}-d IDX data, got {ndim}-d")
    dims = struct.unpack(f">{ndim}I", fh.read(4 * ndim))
    return dims


def read_idx_images(path) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"dataset file not found: {path}")
    with open(path, "rb") as fh:
        n, rows, cols = _read_header(fh, path, expected_ndim=3)
        raw = fh.read(n * rows * cols)
        if len(raw) != n * rows * cols:
            raise DataFormatError(f"{path}: truncated IDX payload")
        return np.frombuffer(raw, dtype=np.uint8).reshape(n, rows, cols)


def read_idx_labels(path) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"dataset file not found: {path}")
    with open(path, "rb") as fh:
        (n,) = _read_header(fh, path, expected_ndim=1)
        raw = fh.read(n)
        if len(raw) != n:
            raise DataFormatError(f"{path}: truncated IDX payload")
        return np.frombuffer(raw, dtype=np.uint8)


def write_idx_images(path, images: np.ndarray):
    """Inverse of read_idx_images, used for round-trip checks and fixtures."""
    images = np.ascontiguousarray(images, dtype=np.uint8)
    if images.ndim != 3:
        raise DataFormatError("images must be (n, rows, cols)")
    with open(path, "wb") as fh:
        fh.write(struct.pack(">BBBB", 0, 0, DTYPE_UBYTE, 3))
        fh.write(struct.pack(">3I", *images.shape))
        fh.write(images.tobytes())


def write_idx_labels(path, labels: np.ndarray):
    labels = np.ascontiguousarray(labels, dtype=np.uint8)
    if labels.ndim != 1:
        raise DataFormatError("labels must be 1-d")
    with open(path, "wb") as fh:
        fh.write(struct.pack(">BBBB", 0, 0, DTYPE_UBYTE, 1))
        fh.write(struct.pack(">I", labels.shape[0]))
        fh.write(labels.tobytes())
