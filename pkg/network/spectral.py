"""Fourier-parameterized mixing layer: |ifft2(place(R * take(fft2(x))))|."""
import math

import numpy as np

from core.autodiff import Parameter, Tensor, as_tensor
from core.errors import ShapeError
from core.fourier import complex_abs, complex_mix, fft2, ifft2, place_modes, retained_modes, take_modes
from core.grid import complex_dtype
from core.rng import RngState
from network.models import SpectralWeights


def init_spectral_weights(
    name: str,
    resolution: tuple[int, int],
    c_in: int,
    c_out: int,
    mode_fraction: float,
    rng: RngState,
) -> SpectralWeights:
    """Complex Gaussian R with std 1/(c_in * sqrt(modes_h * modes_w))."""
    rows = retained_modes(resolution[0], mode_fraction)
    cols = retained_modes(resolution[1], mode_fraction)
    shape = (len(rows), len(cols), c_in, c_out)
    std = 1.0 / (c_in * math.sqrt(len(rows) * len(cols)))
    gen = rng.generator
    # Each component carries half the variance so E|R|^2 = std^2.
    component = std / math.sqrt(2.0)
    values = component * (gen.standard_normal(shape) + 1j * gen.standard_normal(shape))
    return SpectralWeights(
        R=Parameter(values.astype(complex_dtype()), name=f"{name}.R"),
        rows=rows,
        cols=cols,
        resolution=tuple(resolution),
    )


def identity_spectral_weights(name: str, resolution: tuple[int, int], channels: int) -> SpectralWeights:
    """R that keeps every mode and mixes nothing; the layer then returns |x|."""
    rows, cols = np.arange(resolution[0]), np.arange(resolution[1])
    values = np.broadcast_to(np.eye(channels), (len(rows), len(cols), channels, channels))
    return SpectralWeights(
        R=Parameter(values.astype(complex_dtype()), name=f"{name}.R"),
        rows=rows,
        cols=cols,
        resolution=tuple(resolution),
    )


def spectral_layer(x, weights: SpectralWeights) -> Tensor:
    x = as_tensor(x)
    if x.ndim < 3:
        raise ShapeError(f"spectral_layer: expected (..., H, W, C) input, got {x.shape}")
    height, width, channels = x.shape[-3:]
    if (height, width) != weights.resolution:
        raise ShapeError(f"spectral_layer: input is {height}x{width}, weights were built for {weights.resolution}")
    if channels != weights.c_in:
        raise ShapeError(f"spectral_layer: input has {channels} channels, R expects {weights.c_in}")
    spectrum = take_modes(fft2(x), weights.rows, weights.cols)
    mixed = complex_mix(spectrum, weights.R)
    return complex_abs(ifft2(place_modes(mixed, weights.rows, weights.cols, height, width)))
