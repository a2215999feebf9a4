"""Binary grid file format.

Layout (all little-endian):

    offset  size  field
    0       8     magic b"OTFSGRID"
    8       2     u16 version (currently 1)
    10      1     u8 domain tag: 0 = delay-Doppler, 1 = delay-time
    11      1     u8 reserved (0)
    12      4     u32 M (delay bins)
    16      4     u32 N (Doppler bins)
    20      8     f64 subcarrier spacing in Hz
    28      8     f64 carrier frequency in Hz
    36      -     M*N cells, row-major (m outer, n inner),
                  each cell f32 real then f32 imaginary

Cells are stored at single precision; reading returns complex128 grids.
"""

from __future__ import annotations

import os
import struct

import numpy as np

from .errors import GridFileError
from .grid import DDGrid, Domain, FrameConfig

MAGIC = b"OTFSGRID"
VERSION = 1

_HEADER = struct.Struct("<8sHBBIIdd")


def write_grid(path, grid: DDGrid) -> None:
    """Serialize a grid atomically (write to a temp file, then rename)."""
    header = _HEADER.pack(
        MAGIC,
        VERSION,
        grid.domain.value,
        0,
        grid.config.m_bins,
        grid.config.n_bins,
        grid.config.scs_hz,
        grid.config.fc_hz,
    )
    flat = np.asarray(grid.cells, dtype=np.complex128).ravel()
    payload = np.empty(2 * flat.size, dtype="<f4")
    payload[0::2] = flat.real
    payload[1::2] = flat.imag
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(header)
        fh.write(payload.tobytes())
    os.replace(tmp, path)


def read_grid(path) -> DDGrid:
    """Read a grid file back into a DDGrid, validating the header."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise GridFileError(f"{path}: file shorter than header")
    magic, version, domain_tag, _reserved, m, n, scs, fc = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise GridFileError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise GridFileError(f"{path}: unsupported version {version}")
    try:
        domain = Domain(domain_tag)
    except ValueError:
        raise GridFileError(f"{path}: unknown domain tag {domain_tag}") from None
    expected = _HEADER.size + 8 * m * n
    if len(raw) != expected:
        raise GridFileError(f"{path}: expected {expected} bytes, found {len(raw)}")
    payload = np.frombuffer(raw, dtype="<f4", offset=_HEADER.size)
    cells = (payload[0::2] + 1j * payload[1::2]).astype(np.complex128).reshape(m, n)
    config = FrameConfig(int(m), int(n), float(scs), float(fc))
    return DDGrid(config, cells, domain)
