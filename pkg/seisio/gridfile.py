"""Bit-exact internal grid format.

Layout (little-endian): magic ``OSGD``, u16 version, u16 dtype code,
three u32 dims (time, trace, channel), u32 sampling interval in
microseconds, then the row-major float32 payload.
"""
import logging
import struct
from pathlib import Path

import numpy as np

from core.errors import FormatError, ShapeError

logger = logging.getLogger(__name__)

MAGIC = b"OSGD"
VERSION = 1
DTYPE_F32 = 1
HEADER = struct.Struct("<4sHH3II")


def dt_to_us(dt: float) -> int:
    return int(round(dt * 1e6))


def grid_bytes(grid: np.ndarray, dt: float) -> bytes:
    grid = np.asarray(grid)
    if grid.ndim == 2:
        grid = grid[..., None]
    if grid.ndim != 3:
        raise ShapeError(f"Grid files hold (time, trace, channel) arrays, got shape {grid.shape}")
    if not np.all(np.isfinite(grid)):
        raise ShapeError("Refusing to write a grid with non-finite samples")
    payload = np.ascontiguousarray(grid, dtype="<f4").tobytes()
    return HEADER.pack(MAGIC, VERSION, DTYPE_F32, *grid.shape, dt_to_us(dt)) + payload


def grid_from_bytes(data: bytes) -> tuple[np.ndarray, float]:
    """Returns (grid, dt in seconds)."""
    if len(data) < HEADER.size:
        raise FormatError(f"Grid file is {len(data)} bytes, shorter than its {HEADER.size}-byte header")
    magic, version, dtype_code, height, width, channels, dt_us = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f"Bad grid magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise FormatError(f"Unsupported grid version {version}")
    if dtype_code != DTYPE_F32:
        raise FormatError(f"Unsupported grid dtype code {dtype_code}")
    expected = height * width * channels * 4
    payload = data[HEADER.size:]
    if len(payload) != expected:
        raise FormatError(f"Grid payload is {len(payload)} bytes, header dims require {expected}")
    grid = np.frombuffer(payload, dtype="<f4").reshape(height, width, channels).astype(np.float32)
    return grid, dt_us * 1e-6


def write_grid(path: str | Path, grid: np.ndarray, dt: float) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(grid_bytes(grid, dt))
    logger.debug(f"Wrote grid {path} shape={np.shape(grid)}")
    return path


def read_grid(path: str | Path) -> tuple[np.ndarray, float]:
    return grid_from_bytes(Path(path).read_bytes())
