import math

import numpy as np
import pytest

from core.errors import ConfigError, DegenerateDataError, ShapeError
from core.rng import RngState
from seismic.forward import (
    add_noise_snr,
    impedance_from_reflectivity,
    impedance_from_v_rho,
    measure_snr_db,
    reflectivity_from_impedance,
    ricker_wavelet,
    synthesize_section,
    synthesize_trace,
)
from seismic.models import ImpedanceSection, ReflectivitySection, TraceSection, snr_label


def test_ricker_wavelet_peaks_at_center_and_is_symmetric():
    wavelet = ricker_wavelet(30.0, 0.001, 81)
    assert wavelet.center == 40
    assert wavelet.samples[40] == pytest.approx(1.0)
    assert np.argmax(wavelet.samples) == 40
    np.testing.assert_allclose(wavelet.samples, wavelet.samples[::-1])


def test_ricker_wavelet_zero_crossing_matches_closed_form():
    # (1 - 2 (pi f t)^2) vanishes at t = 1 / (pi f sqrt 2)
    wavelet = ricker_wavelet(25.0, 0.0001, 401)
    t = (np.arange(401) - 200) * 0.0001
    crossing = 1.0 / (math.pi * 25.0 * math.sqrt(2.0))
    sign_changes = t[1:][np.diff(np.sign(wavelet.samples)) != 0]
    assert np.min(np.abs(np.abs(sign_changes) - crossing)) < 0.0002


@pytest.mark.parametrize(
    "kwargs, message",
    [
        ({"peak_frequency": 30.0, "dt": 0.001, "length": 80}, "odd"),
        ({"peak_frequency": 600.0, "dt": 0.001, "length": 81}, "Peak frequency"),
        ({"peak_frequency": 30.0, "dt": 0.0, "length": 81}, "dt must be positive"),
    ],
)
def test_ricker_wavelet_rejects_bad_parameters(kwargs, message):
    with pytest.raises(ConfigError, match=message):
        ricker_wavelet(**kwargs)


def test_impedance_from_v_rho_is_the_product():
    v = np.array([[1500.0, 2000.0], [2500.0, 3000.0]])
    rho = np.array([[1.0, 2.0], [2.2, 2.4]])
    np.testing.assert_allclose(impedance_from_v_rho(v, rho).grid[..., 0], v * rho)


def test_impedance_from_v_rho_rejects_non_positive_values():
    with pytest.raises(ConfigError, match="strictly positive"):
        impedance_from_v_rho(np.array([[1.0, 0.0]]), np.ones((1, 2)))


def test_reflectivity_of_two_layers_is_a_single_spike():
    ip = np.concatenate([np.full(10, 2000.0), np.full(10, 4000.0)])[:, None, None]
    r = reflectivity_from_impedance(ImpedanceSection(grid=ip, dt=0.002)).grid[:, 0, 0]
    expected = np.zeros(20)
    expected[9] = math.log(2.0) / 2.0
    np.testing.assert_allclose(r, expected, atol=1e-15)


def test_reflectivity_roundtrip_recovers_impedance():
    ip = 2000.0 + 3000.0 * RngState(1).generator.random((64, 8, 1))
    r = reflectivity_from_impedance(ImpedanceSection(grid=ip, dt=0.001))
    restored = impedance_from_reflectivity(r, ip[0, :, 0]).grid
    np.testing.assert_allclose(restored, ip, rtol=1e-12)


def test_impedance_from_reflectivity_rejects_unit_magnitude():
    with pytest.raises(ConfigError, match="below 1"):
        impedance_from_reflectivity(ReflectivitySection(grid=np.ones((4, 1, 1)), dt=0.001), 2000.0)


def test_synthesize_trace_places_wavelet_on_spike():
    wavelet = ricker_wavelet(30.0, 0.001, 41)
    r = np.zeros(128)
    r[60] = 0.5
    trace = synthesize_trace(r, wavelet)
    assert trace.shape == (128,)
    np.testing.assert_allclose(trace[40:81], 0.5 * wavelet.samples)
    assert np.all(trace[:40] == 0) and np.all(trace[81:] == 0)


def test_synthesize_trace_rejects_dt_mismatch():
    with pytest.raises(ConfigError, match="does not match"):
        synthesize_trace(np.zeros(8), ricker_wavelet(30.0, 0.001, 41), dt=0.002)


def test_synthesize_section_convolves_every_trace():
    wavelet = ricker_wavelet(30.0, 0.002, 31)
    grid = np.zeros((64, 3, 1))
    grid[20, 0, 0], grid[30, 1, 0], grid[40, 2, 0] = 0.1, -0.2, 0.3
    section = synthesize_section(ReflectivitySection(grid=grid, dt=0.002), wavelet)
    for column, (depth, amplitude) in enumerate([(20, 0.1), (30, -0.2), (40, 0.3)]):
        assert section.grid[depth, column, 0] == pytest.approx(amplitude)
    assert section.is_clean


def test_synthesize_section_rejects_multichannel_grid():
    with pytest.raises(ShapeError, match="time, trace"):
        synthesize_section(ReflectivitySection(grid=np.zeros((8, 2, 2)), dt=0.001), ricker_wavelet(30.0, 0.001, 41))


@pytest.mark.parametrize("snr_db", [0.0, 10.0, 20.0, 30.0])
def test_add_noise_hits_requested_snr(snr_db):
    wavelet = ricker_wavelet(30.0, 0.001, 81)
    r = RngState(3).generator.standard_normal(100_000) * (RngState(4).generator.random(100_000) < 0.05)
    clean = TraceSection(grid=synthesize_trace(r, wavelet)[:, None, None], dt=0.001)
    noisy = add_noise_snr(clean, snr_db, RngState(5))
    assert abs(measure_snr_db(clean.grid, noisy.grid) - snr_db) <= 0.3
    assert noisy.snr_db == snr_db


def test_add_noise_none_returns_clean_copy():
    clean = TraceSection(grid=np.ones((8, 2, 1)), dt=0.001)
    out = add_noise_snr(clean, None, RngState(0))
    np.testing.assert_array_equal(out.grid, clean.grid)
    assert out.grid is not clean.grid
    assert measure_snr_db(clean.grid, out.grid) == math.inf


def test_add_noise_to_zero_signal_is_degenerate():
    with pytest.raises(DegenerateDataError, match="zero-power"):
        add_noise_snr(TraceSection(grid=np.zeros((8, 2, 1)), dt=0.001), 10.0, RngState(0))


def test_add_noise_is_deterministic_for_a_seed():
    clean = TraceSection(grid=RngState(1).generator.standard_normal((32, 4, 1)), dt=0.001)
    first = add_noise_snr(clean, 10.0, RngState(9)).grid
    second = add_noise_snr(clean, 10.0, RngState(9)).grid
    np.testing.assert_array_equal(first, second)


def test_snr_label():
    assert snr_label(None) == "clean"
    assert snr_label(30.0) == "snr30"
    assert snr_label(0.0) == "snr0"
