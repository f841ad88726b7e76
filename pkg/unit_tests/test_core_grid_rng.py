import numpy as np
import pytest

from core.errors import ConfigError, ShapeError
from core.grid import (
    as_real_grid,
    complex_dtype,
    is_power_of_two,
    precision,
    precision_mode,
    real_dtype,
    require_power_of_two,
)
from core.rng import RngState


def test_precision_defaults_to_float32_and_restores():
    assert precision_mode() == "float32"
    with precision("float64"):
        assert real_dtype() is np.float64
        assert complex_dtype() is np.complex128
    assert real_dtype() is np.float32
    assert complex_dtype() is np.complex64


def test_precision_rejects_unknown_mode():
    with pytest.raises(ConfigError, match="Unknown precision mode"):
        with precision("float16"):
            pass


def test_as_real_grid_checks_rank_and_finiteness():
    assert as_real_grid(np.zeros((2, 2, 1))).dtype == np.float32
    with pytest.raises(ShapeError, match="H, W, C"):
        as_real_grid(np.zeros((4, 4)))
    with pytest.raises(ShapeError, match="NaN"):
        as_real_grid(np.full((2, 2, 1), np.nan))


@pytest.mark.parametrize("n, expected", [(1, True), (2, True), (64, True), (0, False), (6, False), (96, False)])
def test_is_power_of_two(n, expected):
    assert is_power_of_two(n) is expected


def test_require_power_of_two_names_the_operation():
    with pytest.raises(ShapeError, match="fft2"):
        require_power_of_two(np.zeros((8, 12, 1)), "fft2")


def test_same_seed_and_keys_give_same_stream():
    first = RngState(7).child("section", 3).generator.standard_normal(16)
    second = RngState(7).child("section", 3).generator.standard_normal(16)
    np.testing.assert_array_equal(first, second)


def test_child_stream_does_not_depend_on_parent_consumption():
    parent = RngState(7)
    untouched = parent.child("noise").generator.random(8)
    parent.generator.random(1000)
    np.testing.assert_array_equal(parent.child("noise").generator.random(8), untouched)


def test_different_keys_give_different_streams():
    rng = RngState(11)
    a = rng.child("train").generator.random(8)
    b = rng.child("val").generator.random(8)
    c = rng.child("train", 1).generator.random(8)
    assert not np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_child_seed_is_deterministic_63_bit():
    rng = RngState(2**64 - 1)
    seed = rng.child_seed("dataset")
    assert seed == RngState(2**64 - 1).child_seed("dataset")
    assert 0 <= seed < 2**63
    assert seed != rng.child_seed("train")


@pytest.mark.parametrize("seed", [-1, 2**64])
def test_seed_must_fit_64_bits(seed):
    with pytest.raises(ConfigError, match="64-bit"):
        RngState(seed)


def test_negative_child_key_is_rejected():
    with pytest.raises(ConfigError, match="non-negative"):
        RngState(0).child(-3)
