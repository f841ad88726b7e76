import numpy as np
import pytest

from core import ops
from core.autodiff import Parameter
from core.errors import ShapeError
from core.fourier import (
    complex_abs,
    complex_mix,
    fft2,
    ifft2,
    one_sided_modes,
    place_modes,
    retained_modes,
    take_modes,
)
from core.gradcheck import check_gradients
from core.grid import precision
from core.rng import RngState


def _dft_matrix(n: int) -> np.ndarray:
    index = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(index, index) / n)


@pytest.mark.parametrize("mode, tolerance", [("float32", 1e-5), ("float64", 1e-10)])
def test_ifft2_inverts_fft2(mode, tolerance):
    gen = RngState(0).generator
    worst = 0.0
    with precision(mode):
        for trial in range(100):
            channels = 1 + trial % 3
            x = gen.standard_normal((64, 64, channels)).astype(mode)
            restored = ifft2(fft2(x)).data
            worst = max(worst, float(np.abs(restored - x).max()))
    assert worst < tolerance


def test_fft2_matches_naive_dft():
    x = RngState(1).generator.standard_normal((8, 8, 2))
    rows, cols = _dft_matrix(8), _dft_matrix(8)
    expected = np.einsum("ah,hwc,bw->abc", rows, x, cols) / 64.0
    with precision("float64"):
        np.testing.assert_allclose(fft2(x).data, expected, atol=1e-12)
    with precision("float32"):
        np.testing.assert_allclose(fft2(x.astype(np.float32)).data, expected, atol=1e-5)


def test_parseval_under_forward_normalization():
    x = RngState(2).generator.standard_normal((16, 32, 3))
    spectrum = fft2(x).data
    assert np.sum(np.abs(x) ** 2) == pytest.approx(16 * 32 * np.sum(np.abs(spectrum) ** 2), rel=1e-10)


def test_unit_dc_mode_inverts_to_ones():
    spectrum = np.zeros((8, 4, 1), dtype=np.complex128)
    spectrum[0, 0, 0] = 1.0
    np.testing.assert_allclose(ifft2(spectrum).data, np.ones((8, 4, 1)), atol=1e-12)


def test_fft2_rejects_non_power_of_two():
    with pytest.raises(ShapeError, match="powers of two"):
        fft2(np.ones((6, 8, 1)))


def test_fft2_keeps_leading_batch_axis():
    x = RngState(3).generator.standard_normal((3, 8, 8, 2))
    out = fft2(x).data
    for item in range(3):
        np.testing.assert_allclose(out[item], fft2(x[item]).data, atol=1e-12)


@pytest.mark.parametrize(
    "n, fraction, expected",
    [
        (32, 0.5, list(range(8)) + list(range(24, 32))),
        (16, 0.25, [0, 1, 14, 15]),
        (8, 1.0, list(range(8))),
        (2, 0.5, [0, 1]),
        (1, 0.5, [0]),
    ],
)
def test_retained_modes(n, fraction, expected):
    assert retained_modes(n, fraction).tolist() == expected


def test_one_sided_modes_keeps_at_least_one():
    assert one_sided_modes(4, 0.01) == 1


def test_place_modes_inverts_take_modes_on_retained_entries():
    z = RngState(4).generator.standard_normal((8, 8, 2)) + 1j * RngState(5).generator.standard_normal((8, 8, 2))
    rows, cols = retained_modes(8, 0.5), retained_modes(8, 0.5)
    restored = place_modes(take_modes(z, rows, cols), rows, cols, 8, 8).data
    mask = np.zeros((8, 8, 1), dtype=bool)
    mask[np.ix_(rows, cols)] = True
    np.testing.assert_array_equal(restored, np.where(mask, z, 0))


def test_complex_mix_matches_einsum():
    gen = RngState(6).generator
    z = gen.standard_normal((2, 4, 4, 3)) + 1j * gen.standard_normal((2, 4, 4, 3))
    weights = gen.standard_normal((4, 4, 3, 5)) + 1j * gen.standard_normal((4, 4, 3, 5))
    out = complex_mix(z, weights).data
    np.testing.assert_allclose(out[1, 2, 3], z[1, 2, 3] @ weights[2, 3])


def test_complex_mix_rejects_mismatched_modes():
    with pytest.raises(ShapeError, match="does not match"):
        complex_mix(np.ones((4, 4, 3), dtype=complex), np.ones((2, 2, 3, 1), dtype=complex))


def _projection(shape):
    return RngState(42).child(*shape).generator.standard_normal(shape)


@pytest.mark.parametrize("seed", range(5))
def test_fft2_gradient_for_real_input(seed):
    with precision("float64"):
        x = Parameter(RngState(seed).generator.standard_normal((2, 4, 8, 2)), "x")
        results = check_gradients(lambda: ops.total(ops.mul(complex_abs(fft2(x)), _projection((2, 4, 8, 2)))), [x])
    assert all(result.passes(1e-4) for result in results)


@pytest.mark.parametrize("seed", range(5))
def test_ifft2_and_complex_mix_gradients_for_complex_parameters(seed):
    gen = RngState(seed).generator
    with precision("float64"):
        z = Parameter(gen.standard_normal((4, 4, 2)) + 1j * gen.standard_normal((4, 4, 2)), "z")
        weights = Parameter(gen.standard_normal((4, 4, 2, 3)) + 1j * gen.standard_normal((4, 4, 2, 3)), "R")
        results = check_gradients(
            lambda: ops.total(ops.mul(complex_abs(ifft2(complex_mix(z, weights))), _projection((4, 4, 3)))),
            [z, weights],
        )
    assert all(result.passes(1e-4) for result in results), results


def test_take_and_place_mode_gradients():
    rows, cols = retained_modes(8, 0.25), retained_modes(8, 0.25)

    def loss(x):
        filtered = ifft2(place_modes(take_modes(fft2(x), rows, cols), rows, cols, 8, 8))
        return ops.total(ops.mul(complex_abs(filtered), _projection((8, 8, 2))))

    with precision("float64"):
        x = Parameter(RngState(8).generator.standard_normal((8, 8, 2)), "x")
        results = check_gradients(lambda: loss(x), [x])
    assert all(result.passes(1e-4) for result in results)
