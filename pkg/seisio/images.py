"""Grayscale PGM export for section figures."""
from pathlib import Path

import numpy as np

from core.errors import FormatError, ShapeError

CLIP_PERCENTILE = 99.0


def section_pixels(section: np.ndarray) -> np.ndarray:
    """8-bit pixels with a symmetric clip at the 99th percentile of |amplitude|; zero maps to 128."""
    section = np.asarray(section, dtype=np.float64)
    if section.ndim == 3:
        section = section[..., 0]
    if section.ndim != 2:
        raise ShapeError(f"Image export expects a (time, trace) section, got {section.shape}")
    if not np.all(np.isfinite(section)):
        raise ShapeError("Cannot export a section with non-finite samples")
    clip = float(np.percentile(np.abs(section), CLIP_PERCENTILE)) if section.size else 0.0
    if clip == 0.0:
        clip = float(np.abs(section).max()) if section.size else 0.0
    scaled = np.zeros_like(section) if clip == 0.0 else np.clip(section / clip, -1.0, 1.0)
    return np.rint(127.5 + 127.5 * scaled).astype(np.uint8)


def export_section_image(section: np.ndarray, path: str | Path) -> Path:
    pixels = section_pixels(section)
    height, width = pixels.shape
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(f"P5\n{width} {height}\n255\n".encode("ascii") + pixels.tobytes())
    return path


def read_pgm(path: str | Path) -> np.ndarray:
    data = Path(path).read_bytes()
    parts = data.split(b"\n", 3)
    if len(parts) < 4 or parts[0] != b"P5":
        raise FormatError(f"{path} is not a binary PGM file")
    width, height = (int(v) for v in parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8).reshape(height, width)
