"""Differentiable 2-D Fourier transforms and the complex ops of the spectral layer.

Normalization: ``fft2`` scales by 1/(H*W), ``ifft2`` is unscaled, so
``ifft2(fft2(x)) == x`` and a unit DC mode inverts to a grid of ones.
Parseval under this convention reads ``sum|x|^2 == H*W * sum|fft2(x)|^2``.
"""
import numpy as np

from core.autodiff import Tensor, as_tensor, record
from core.errors import ShapeError
from core.grid import complex_dtype_for, real_dtype_for, require_power_of_two, spatial_shape

_AXES = (-3, -2)


def fft2(x) -> Tensor:
    x = as_tensor(x)
    require_power_of_two(x.data, "fft2")
    real_input = not x.is_complex
    out = np.fft.fft2(x.data, axes=_AXES, norm="forward").astype(complex_dtype_for(x.dtype), copy=False)

    def backward(g):
        gx = np.fft.ifft2(g, axes=_AXES, norm="backward")
        return (np.real(gx).astype(x.dtype) if real_input else gx.astype(x.dtype),)

    return record(out, (x,), backward)


def ifft2(z) -> Tensor:
    z = as_tensor(z)
    require_power_of_two(z.data, "ifft2")
    dtype = complex_dtype_for(z.dtype)
    out = np.fft.ifft2(z.data, axes=_AXES, norm="forward").astype(dtype, copy=False)

    def backward(g):
        gz = np.fft.fft2(g, axes=_AXES, norm="backward").astype(dtype, copy=False)
        return (gz if z.is_complex else np.real(gz).astype(z.dtype),)

    return record(out, (z,), backward)


def one_sided_modes(n: int, mode_fraction: float) -> int:
    """Number of retained low frequencies on each side of the spectrum along an axis of length ``n``."""
    return max(1, int(round(mode_fraction * n / 2)))


def retained_modes(n: int, mode_fraction: float) -> np.ndarray:
    """Indices ``[0, k) + [n-k, n)`` of the retained modes; every index once if they cover the axis."""
    k = one_sided_modes(n, mode_fraction)
    if 2 * k >= n:
        return np.arange(n)
    return np.concatenate([np.arange(k), np.arange(n - k, n)])


def take_modes(z, rows: np.ndarray, cols: np.ndarray) -> Tensor:
    z = as_tensor(z)
    height, width = spatial_shape(z.data)
    if rows.max(initial=-1) >= height or cols.max(initial=-1) >= width:
        raise ShapeError(f"take_modes: mode indices exceed a {height}x{width} spectrum")
    index = (Ellipsis, rows[:, None], cols[None, :], slice(None))

    def backward(g):
        full = np.zeros(z.shape, dtype=g.dtype)
        full[index] = g
        return (full,)

    return record(z.data[index], (z,), backward)


def place_modes(z, rows: np.ndarray, cols: np.ndarray, height: int, width: int) -> Tensor:
    """Zero-filled spectrum of size height x width holding ``z`` at the given modes."""
    z = as_tensor(z)
    if z.shape[-3:-1] != (len(rows), len(cols)):
        raise ShapeError(f"place_modes: got {z.shape[-3:-1]} modes for {len(rows)}x{len(cols)} indices")
    index = (Ellipsis, rows[:, None], cols[None, :], slice(None))
    full = np.zeros(z.shape[:-3] + (height, width, z.shape[-1]), dtype=z.dtype)
    full[index] = z.data
    return record(full, (z,), lambda g: (g[index],))


def complex_mix(z, weights) -> Tensor:
    """Per-mode channel mixing: out[..., a, b, o] = sum_i z[..., a, b, i] * R[a, b, i, o]."""
    z, weights = as_tensor(z), as_tensor(weights)
    if weights.ndim != 4 or z.shape[-3:] != weights.shape[:3]:
        raise ShapeError(f"complex_mix: spectrum {z.shape} does not match weights {weights.shape}")
    lead = z.shape[:-3]
    modes_h, modes_w, c_in, c_out = weights.shape
    out = np.einsum("...abi,abio->...abo", z.data, weights.data)

    def backward(g):
        gz = np.einsum("...abo,abio->...abi", g, np.conj(weights.data))
        flat_z = np.conj(z.data).reshape((-1, modes_h, modes_w, c_in))
        flat_g = g.reshape((-1, modes_h, modes_w, c_out))
        gw = np.einsum("nabi,nabo->abio", flat_z, flat_g)
        if not z.is_complex:
            gz = np.real(gz)
        return gz.reshape(lead + (modes_h, modes_w, c_in)), gw

    return record(out, (z, weights), backward)


def complex_abs(z) -> Tensor:
    """Elementwise magnitude; the subgradient at 0 is 0 in both components."""
    z = as_tensor(z)
    out = np.abs(z.data).astype(real_dtype_for(z.dtype), copy=False)

    def backward(g):
        safe = np.where(out > 0, out, 1.0)
        return (np.where(out > 0, g * z.data / safe, 0.0).astype(z.dtype, copy=False),)

    return record(out, (z,), backward)
