"""
FLD1 binary field files.

Layout (little-endian):
    magic   4 bytes  b"FLD1"
    version u32
    d       u32
    components u32
    n       u32
    time    f64
    nu      f64
    payload components * n^d float64 values, component-major then row-major

Round trips are bit-exact.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .fields import Field
from .grid import Grid

MAGIC = b"FLD1"
VERSION = 1
_HEADER = struct.Struct("<4sIIIIdd")


class FieldFormatError(ValueError):
    """Raised for malformed FLD1 data."""


def write_field(path, f: Field) -> None:
    path = Path(path)
    header = _HEADER.pack(MAGIC, VERSION, f.grid.d, f.ncomp, f.grid.n, f.time, f.nu)
    payload = np.ascontiguousarray(f.data, dtype="<f8").tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)


def read_field(path) -> Field:
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < _HEADER.size:
        raise FieldFormatError(f"{path}: truncated header")
    magic, version, d, ncomp, n, time, nu = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FieldFormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise FieldFormatError(f"{path}: unsupported version {version}")
    expected = ncomp * n**d * 8
    payload = raw[_HEADER.size :]
    if len(payload) != expected:
        raise FieldFormatError(
            f"{path}: payload is {len(payload)} bytes, expected {expected}"
        )
    grid = Grid(d, n)
    data = np.frombuffer(payload, dtype="<f8").reshape((ncomp,) + grid.shape)
    return Field(grid, data.astype(np.float64), time=time, nu=nu)
