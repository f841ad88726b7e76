"""Patch extraction/stitching and invertible per-patch normalization."""
from dataclasses import dataclass
from typing import Literal

import numpy as np

from core.errors import ShapeError
from core.grid import is_power_of_two
from core.rng import RngState

NormScheme = Literal["minmax_sym", "zscore"]


@dataclass(frozen=True)
class NormStats:
    """Statistics needed to undo ``normalize``.

    ``minmax_sym`` stores (min, max); ``zscore`` stores (mean, std).
    ``degenerate`` marks a constant patch that normalized to all zeros.
    """
    scheme: str
    first: float
    second: float
    degenerate: bool = False

    def as_dict(self) -> dict:
        return {"scheme": self.scheme, "first": self.first, "second": self.second, "degenerate": self.degenerate}


@dataclass(frozen=True)
class PatchIndex:
    source: str
    origin: tuple[int, int]
    size: tuple[int, int]
    stride: tuple[int, int]
    stats: NormStats | None = None

    def window(self) -> tuple[slice, slice]:
        (t0, x0), (h, w) = self.origin, self.size
        return slice(t0, t0 + h), slice(x0, x0 + w)


def _pair(value: int | tuple[int, int]) -> tuple[int, int]:
    return (value, value) if isinstance(value, int) else (int(value[0]), int(value[1]))


def window_starts(length: int, size: int, stride: int) -> list[int]:
    """Regular starts plus a flush final window so the whole axis is covered."""
    starts = list(range(0, length - size + 1, stride))
    if starts[-1] != length - size:
        starts.append(length - size)
    return starts


def extract_patches(
    section: np.ndarray,
    size: int | tuple[int, int],
    stride: int | tuple[int, int] | None = None,
    rng: RngState | None = None,
    shuffle: bool = False,
    source: str = "",
) -> tuple[np.ndarray, list[PatchIndex]]:
    """Cut a (time, trace[, channel]) section into (N, h, w, C) windows.

    Order is row-major over window origins, or a permutation drawn from
    ``rng`` when ``shuffle`` is set.
    """
    section = np.asarray(section)
    if section.ndim == 2:
        section = section[..., None]
    if section.ndim != 3:
        raise ShapeError(f"extract_patches expects a (time, trace, channel) section, got {section.shape}")
    size = _pair(size)
    stride = _pair(stride) if stride is not None else size
    height, width = section.shape[:2]
    if size[0] > height or size[1] > width:
        raise ShapeError(f"Patch size {size} exceeds section dims {(height, width)}")
    if not (is_power_of_two(size[0]) and is_power_of_two(size[1])):
        raise ShapeError(f"Patch size {size} must be powers of two")
    if stride[0] < 1 or stride[1] < 1:
        raise ShapeError(f"Patch stride must be positive, got {stride}")

    indices = [
        PatchIndex(source=source, origin=(t0, x0), size=size, stride=stride)
        for t0 in window_starts(height, size[0], stride[0])
        for x0 in window_starts(width, size[1], stride[1])
    ]
    if shuffle:
        if rng is None:
            raise ShapeError("shuffle=True needs an rng")
        indices = [indices[i] for i in rng.child("patches", source).generator.permutation(len(indices))]
    patches = np.stack([section[index.window()] for index in indices])
    return patches, indices


def stitch_patches(patches: np.ndarray, indices: list[PatchIndex], shape: tuple[int, ...]) -> np.ndarray:
    """Average overlapping windows back into a section of ``shape``."""
    patches = np.asarray(patches, dtype=np.float64)
    if len(patches) != len(indices):
        raise ShapeError(f"{len(patches)} patches but {len(indices)} indices")
    if len(shape) == 2:
        shape = (*shape, patches.shape[-1])
    total = np.zeros(shape, dtype=np.float64)
    counts = np.zeros(shape[:2] + (1,), dtype=np.float64)
    for patch, index in zip(patches, indices):
        rows, cols = index.window()
        if rows.stop > shape[0] or cols.stop > shape[1]:
            raise ShapeError(f"Patch at {index.origin} of size {index.size} falls outside {shape[:2]}")
        total[rows, cols] += patch
        counts[rows, cols] += 1.0
    if np.any(counts == 0):
        raise ShapeError("Patches do not cover the whole section")
    return total / counts


def normalize(patch: np.ndarray, scheme: NormScheme = "minmax_sym") -> tuple[np.ndarray, NormStats]:
    patch = np.asarray(patch, dtype=np.float64)
    if not np.all(np.isfinite(patch)):
        raise ShapeError("Cannot normalize a patch with non-finite samples")
    if scheme == "minmax_sym":
        low, high = float(patch.min()), float(patch.max())
        if high == low:
            return np.zeros_like(patch), NormStats(scheme, low, high, degenerate=True)
        return 2.0 * (patch - low) / (high - low) - 1.0, NormStats(scheme, low, high)
    if scheme == "zscore":
        mean, std = float(patch.mean()), float(patch.std())
        if std == 0.0:
            return np.zeros_like(patch), NormStats(scheme, mean, std, degenerate=True)
        return (patch - mean) / std, NormStats(scheme, mean, std)
    raise ShapeError(f"Unknown normalization scheme {scheme!r}")


def denormalize(patch: np.ndarray, stats: NormStats) -> np.ndarray:
    patch = np.asarray(patch, dtype=np.float64)
    if stats.degenerate:
        return np.full_like(patch, stats.first)
    if stats.scheme == "minmax_sym":
        return (patch + 1.0) * (stats.second - stats.first) / 2.0 + stats.first
    if stats.scheme == "zscore":
        return patch * stats.second + stats.first
    raise ShapeError(f"Unknown normalization scheme {stats.scheme!r}")


def normalize_patches(
    patches: np.ndarray, indices: list[PatchIndex], scheme: NormScheme
) -> tuple[np.ndarray, list[PatchIndex]]:
    """Normalize each patch independently, recording its statistics on the index."""
    normalized, updated = [], []
    for patch, index in zip(patches, indices):
        values, stats = normalize(patch, scheme)
        normalized.append(values)
        updated.append(PatchIndex(index.source, index.origin, index.size, index.stride, stats))
    return np.stack(normalized), updated
