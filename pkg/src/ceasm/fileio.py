"""Binary field files (CEAF) and 8-bit amplitude previews (PGM).

CEAF layout, little-endian::

    b"CEAF"  u32 version (=1)  u32 n_x  u32 n_y  f64 pitch_m
    n_x * n_y pairs of f64 (re, im), row-major
"""
from __future__ import annotations

import struct
from pathlib import Path
from typing import Union

import numpy as np

from .errors import InvalidArgumentError
from .field import ComplexField, GridSpec

__all__ = ["read_ceaf", "write_ceaf", "write_pgm", "dump_field"]

MAGIC = b"CEAF"
VERSION = 1
_HEADER = struct.Struct("<4sIIId")

PathLike = Union[str, Path]


def write_ceaf(field: ComplexField, path: PathLike) -> None:
    g = field.grid
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, g.n_x, g.n_y, g.pitch))
        fh.write(np.ascontiguousarray(field.data, dtype="<c16").tobytes())


def read_ceaf(path: PathLike) -> ComplexField:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise InvalidArgumentError(f"{path}: truncated CEAF header")
    magic, version, n_x, n_y, pitch = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise InvalidArgumentError(f"{path}: not a CEAF file")
    if version != VERSION:
        raise InvalidArgumentError(f"{path}: unsupported CEAF version {version}")
    expected = _HEADER.size + 16 * n_x * n_y
    if len(raw) != expected:
        raise InvalidArgumentError(f"{path}: expected {expected} bytes, found {len(raw)}")
    data = np.frombuffer(raw, dtype="<c16", offset=_HEADER.size).reshape(n_y, n_x)
    return ComplexField(GridSpec(n_x, n_y, pitch), data)


def write_pgm(field: ComplexField, path: PathLike) -> None:
    """Binary PGM of ``|u|`` with linear min-max scaling to 0..255."""
    amp = np.abs(field.data)
    lo, hi = float(amp.min()), float(amp.max())
    if hi > lo:
        img = np.round((amp - lo) / (hi - lo) * 255.0).astype(np.uint8)
    else:
        img = np.zeros(amp.shape, dtype=np.uint8)
    g = field.grid
    with open(path, "wb") as fh:
        fh.write(f"P5\n{g.n_x} {g.n_y}\n255\n".encode("ascii"))
        fh.write(img.tobytes())


def dump_field(field: ComplexField, path: PathLike) -> None:
    """Write ``path`` as CEAF and an amplitude preview next to it with suffix ``.pgm``."""
    path = Path(path)
    write_ceaf(field, path)
    write_pgm(field, path.with_suffix(".pgm"))
