"""Binary I/Q cube interchange format.

Layout, all little-endian::

    offset  size  field
    0       4     magic b"RQCB"
    4       2     version (uint16, currently 1)
    6       2     sample format (uint16, 1 = complex64: float32 re, float32 im)
    8       4     N_c chirps (uint32)
    12      4     V elements (uint32)
    16      4     N_s samples per chirp (uint32)
    20      ...   payload, N_c * V * N_s * 8 bytes, (chirp, element, sample) C order

Vendor captures can be converted by writing their samples in this order;
:func:`read_cube` then feeds the rest of the pipeline.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..errors import FormatError
from ..scene import DataCube

MAGIC = b"RQCB"
VERSION = 1
FORMAT_COMPLEX64 = 1
HEADER = struct.Struct("<4sHHIII")
_DTYPE = np.dtype("<c8")


def encode_cube(cube):
    s = np.asarray(cube.samples if isinstance(cube, DataCube) else cube)
    if s.ndim != 3:
        raise ValueError("cube must be 3-D [chirp, element, sample]")
    n_c, v, n_s = s.shape
    head = HEADER.pack(MAGIC, VERSION, FORMAT_COMPLEX64, n_c, v, n_s)
    return head + np.ascontiguousarray(s, dtype=_DTYPE).tobytes()


def write_cube(path, cube):
    """Write ``cube`` (a DataCube or complex array); samples are stored as complex64."""
    Path(path).write_bytes(encode_cube(cube))


def decode_cube(buf):
    if len(buf) < HEADER.size:
        raise FormatError(f"header needs {HEADER.size} bytes, got {len(buf)}")
    magic, version, fmt, n_c, v, n_s = HEADER.unpack_from(buf)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise FormatError(f"unsupported version {version}, expected {VERSION}")
    if fmt != FORMAT_COMPLEX64:
        raise FormatError(f"unsupported sample format {fmt}, expected {FORMAT_COMPLEX64}")
    expected = n_c * v * n_s * _DTYPE.itemsize
    actual = len(buf) - HEADER.size
    if actual != expected:
        raise FormatError(f"payload length mismatch: expected {expected} bytes, got {actual} bytes")
    data = np.frombuffer(buf, _DTYPE, offset=HEADER.size).reshape(n_c, v, n_s)
    return DataCube(data.astype(np.complex64))


def read_cube(path):
    """Load a cube file written by :func:`write_cube` (samples stay complex64)."""
    p = Path(path)
    if not p.is_file():
        raise FormatError(f"no such cube file: {p}")
    return decode_cube(p.read_bytes())
