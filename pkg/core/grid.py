"""Dense grid conventions: precision mode, shape checks and dtype helpers.

Grids are numpy arrays laid out as (..., height, width, channels). A single
RealGrid is 3-D; a mini-batch adds one leading axis.
"""
import contextlib
import contextvars
from collections.abc import Iterator

import numpy as np

from core.errors import ConfigError, ShapeError

_DTYPES = {
    "float32": (np.float32, np.complex64),
    "float64": (np.float64, np.complex128),
}

_precision: contextvars.ContextVar[str] = contextvars.ContextVar("precision", default="float32")


def precision_mode() -> str:
    return _precision.get()


@contextlib.contextmanager
def precision(mode: str) -> Iterator[None]:
    """Temporarily switch the default dtype used for new grids and parameters."""
    if mode not in _DTYPES:
        raise ConfigError(f"Unknown precision mode '{mode}', expected one of {sorted(_DTYPES)}")
    token = _precision.set(mode)
    try:
        yield
    finally:
        _precision.reset(token)


def real_dtype() -> type[np.floating]:
    return _DTYPES[_precision.get()][0]


def complex_dtype() -> type[np.complexfloating]:
    return _DTYPES[_precision.get()][1]


def complex_dtype_for(dtype: np.dtype) -> np.dtype:
    """Complex dtype with the same component width as ``dtype``."""
    return np.result_type(dtype, np.complex64)


def real_dtype_for(dtype: np.dtype) -> np.dtype:
    return np.finfo(np.result_type(dtype, np.float32)).dtype


def as_real_grid(values, dtype=None) -> np.ndarray:
    """Coerce array-like input into a finite real grid of rank >= 3."""
    array = np.asarray(values, dtype=dtype or real_dtype())
    if array.ndim < 3:
        raise ShapeError(f"Expected a grid shaped (..., H, W, C), got shape {array.shape}")
    check_finite(array, "grid")
    return array


def check_finite(array: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(array)):
        raise ShapeError(f"{what} contains NaN or infinite values")


def spatial_shape(array: np.ndarray) -> tuple[int, int]:
    if array.ndim < 3:
        raise ShapeError(f"Expected a grid shaped (..., H, W, C), got shape {array.shape}")
    return array.shape[-3], array.shape[-2]


def is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def require_power_of_two(array: np.ndarray, op: str) -> None:
    height, width = spatial_shape(array)
    if not (is_power_of_two(height) and is_power_of_two(width)):
        raise ShapeError(f"{op}: spatial dims must be powers of two, got {height}x{width}")
