"""Convolutional forward model: impedance -> reflectivity -> trace (+ noise)."""
import math

import numpy as np

from core.errors import ConfigError, DegenerateDataError, ShapeError
from core.grid import check_finite
from core.rng import RngState
from seismic.models import ImpedanceSection, ReflectivitySection, TraceSection, Wavelet


def ricker_wavelet(peak_frequency: float, dt: float, length: int) -> Wavelet:
    """Zero-phase Ricker wavelet with its unit peak on the middle sample."""
    if length < 1 or length % 2 == 0:
        raise ConfigError(f"Wavelet length must be a positive odd sample count, got {length}")
    if dt <= 0:
        raise ConfigError(f"dt must be positive, got {dt}")
    nyquist = 1.0 / (2.0 * dt)
    if not 0 < peak_frequency < nyquist:
        raise ConfigError(f"Peak frequency {peak_frequency} Hz must lie in (0, {nyquist:g}) Hz for dt={dt}")
    t = (np.arange(length) - length // 2) * dt
    arg = (math.pi * peak_frequency * t) ** 2
    return Wavelet(samples=(1.0 - 2.0 * arg) * np.exp(-arg), dt=dt, peak_frequency=peak_frequency)


def _section_grid(values, what: str) -> np.ndarray:
    array = np.asarray(values, dtype=np.float64)
    if array.ndim == 2:
        array = array[..., None]
    if array.ndim != 3 or array.shape[-1] != 1:
        raise ShapeError(f"{what} must be shaped (time, trace) or (time, trace, 1), got {array.shape}")
    check_finite(array, what)
    return array


def impedance_from_v_rho(v, rho, dt: float = 0.001) -> ImpedanceSection:
    velocity = _section_grid(v, "velocity")
    density = _section_grid(rho, "density")
    if velocity.shape != density.shape:
        raise ShapeError(f"velocity {velocity.shape} and density {density.shape} shapes differ")
    if np.any(velocity <= 0) or np.any(density <= 0):
        raise ConfigError("velocity and density must be strictly positive")
    return ImpedanceSection(grid=velocity * density, dt=dt)


def reflectivity_from_impedance(ip: ImpedanceSection) -> ReflectivitySection:
    """r[t] = (ln ip[t+1] - ln ip[t]) / 2 down each trace; the last sample is 0."""
    grid = _section_grid(ip.grid, "impedance")
    if np.any(grid <= 0):
        raise ConfigError("impedance must be strictly positive")
    log_ip = np.log(grid)
    reflectivity = np.zeros_like(grid)
    reflectivity[:-1] = np.diff(log_ip, axis=0) / 2.0
    return ReflectivitySection(grid=reflectivity, dt=ip.dt)


def impedance_from_reflectivity(r: ReflectivitySection, ip0) -> ImpedanceSection:
    """Integrate reflectivity down each trace: ip[t] = ip0 * exp(2 * sum_{k<t} r[k]).

    ``ip0`` is a scalar or one value per trace.
    """
    grid = _section_grid(r.grid, "reflectivity")
    if np.any(np.abs(grid) >= 1):
        raise ConfigError("reflectivity magnitudes must be below 1")
    top = np.asarray(ip0, dtype=np.float64)
    if np.any(top <= 0):
        raise ConfigError(f"ip0 must be positive, got {ip0}")
    cumulative = np.zeros_like(grid)
    cumulative[1:] = np.cumsum(grid[:-1], axis=0)
    if top.ndim == 1:
        top = top[None, :, None]
    return ImpedanceSection(grid=top * np.exp(2.0 * cumulative), dt=r.dt)


def synthesize_trace(r: np.ndarray, wavelet: Wavelet, dt: float | None = None) -> np.ndarray:
    """Convolve a reflectivity series with the wavelet, cropped to len(r) around the wavelet peak."""
    if dt is not None and not math.isclose(dt, wavelet.dt, rel_tol=1e-9):
        raise ConfigError(f"Reflectivity dt {dt} does not match wavelet dt {wavelet.dt}")
    series = np.asarray(r, dtype=np.float64)
    if series.ndim != 1:
        raise ShapeError(f"synthesize_trace expects a 1-D series, got shape {series.shape}")
    full = np.convolve(series, wavelet.samples, mode="full")
    return full[wavelet.center:wavelet.center + len(series)]


def synthesize_section(r: ReflectivitySection, wavelet: Wavelet) -> TraceSection:
    grid = _section_grid(r.grid, "reflectivity")
    traces = np.empty_like(grid)
    for column in range(grid.shape[1]):
        traces[:, column, 0] = synthesize_trace(grid[:, column, 0], wavelet, dt=r.dt)
    return TraceSection(grid=traces, dt=r.dt, snr_db=None)


def signal_power(values: np.ndarray) -> float:
    return float(np.mean(np.square(values, dtype=np.float64)))


def measure_snr_db(clean: np.ndarray, noisy: np.ndarray) -> float:
    noise_power = signal_power(np.asarray(noisy) - np.asarray(clean))
    if noise_power == 0.0:
        return math.inf
    return 10.0 * math.log10(signal_power(clean) / noise_power)


def add_noise_snr(s: TraceSection, snr_db: float | None, rng: RngState) -> TraceSection:
    """Add white Gaussian noise rescaled so the section-level SNR equals ``snr_db`` exactly.

    ``None`` or +inf returns the section unchanged.
    """
    if snr_db is None or math.isinf(snr_db):
        return TraceSection(grid=s.grid.copy(), dt=s.dt, snr_db=None)
    power = signal_power(s.grid)
    if power == 0.0:
        raise DegenerateDataError(f"Cannot add noise at {snr_db} dB to a zero-power signal")
    noise = rng.generator.standard_normal(s.grid.shape)
    target_power = power / 10.0 ** (snr_db / 10.0)
    noise *= math.sqrt(target_power / signal_power(noise))
    return TraceSection(grid=s.grid + noise, dt=s.dt, snr_db=float(snr_db))
