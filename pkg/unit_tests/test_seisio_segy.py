import struct
from fractions import Fraction

import numpy as np
import pytest

from core.errors import FormatError, ShapeError
from core.rng import RngState
from seisio.segy import (
    BIN_FORMAT_CODE,
    FORMAT_IBM,
    ibm32_to_real,
    read_segy,
    real_to_ibm32,
    section_from_traces,
    write_segy,
)


def _ibm_oracle(word: int) -> float:
    sign = -1 if word >> 31 else 1
    exponent = (word >> 24) & 0x7F
    fraction = Fraction(word & 0x00FFFFFF, 2**24)
    return float(sign * fraction * Fraction(16) ** (exponent - 64))


@pytest.mark.parametrize("word, expected", [(0x42640000, 100.0), (0xC2640000, -100.0), (0x00000000, 0.0), (0x41100000, 1.0)])
def test_ibm_known_words(word, expected):
    assert ibm32_to_real(word) == expected


def test_ibm_decode_matches_exact_rational_oracle():
    gen = RngState(0).generator
    exponents = gen.integers(64 - 20, 64 + 20, size=100)
    fractions = gen.integers(0, 2**24, size=100)
    signs = gen.integers(0, 2, size=100)
    for sign, exponent, fraction in zip(signs, exponents, fractions):
        word = int(sign) << 31 | int(exponent) << 24 | int(fraction)
        assert ibm32_to_real(word) == _ibm_oracle(word), hex(word)


@pytest.mark.parametrize("value, word", [(100.0, 0x42640000), (-100.0, 0xC2640000), (0.0, 0), (1.0, 0x41100000)])
def test_ibm_encode_known_values(value, word):
    assert real_to_ibm32(value) == word


def test_ibm_encode_is_close_for_random_values():
    values = RngState(1).generator.standard_normal(200) * 1e3
    decoded = np.array([ibm32_to_real(real_to_ibm32(float(v))) for v in values])
    np.testing.assert_allclose(decoded, values, rtol=2**-20)


def test_ibm_encode_rejects_non_finite():
    with pytest.raises(ShapeError, match="non-finite"):
        real_to_ibm32(float("nan"))


def test_ieee_single_trace_roundtrip():
    data = write_segy(np.array([[1.0], [2.0]]), 1000)
    assert len(data) == 3600 + 240 + 8
    binary, traces = read_segy(data)
    assert (binary.sample_interval_us, binary.samples_per_trace, binary.format_code) == (1000, 2, 5)
    assert len(traces) == 1
    np.testing.assert_array_equal(traces[0].samples, [1.0, 2.0])


def test_ibm_section_roundtrip_keeps_headers():
    section = np.array([[0.5, -3.25], [100.0, 0.0], [-0.125, 7.0]])
    data = write_segy(section, 2000, FORMAT_IBM, description="line 7\nsynthetic", inlines=np.array([7, 7]), crosslines=np.array([10, 11]))
    binary, traces = read_segy(data)
    assert binary.format_code == FORMAT_IBM
    assert binary.text_header.startswith("C 1 line 7")
    assert [(t.inline, t.crossline) for t in traces] == [(7, 10), (7, 11)]
    assert all(t.sample_interval_us == 2000 for t in traces)
    np.testing.assert_array_equal(section_from_traces(traces)[..., 0], section)


def test_zero_trace_file():
    binary, traces = read_segy(write_segy(np.zeros((4, 0)), 1000))
    assert traces == []
    assert binary.samples_per_trace == 4
    with pytest.raises(ShapeError, match="No traces"):
        section_from_traces(traces)


def test_unsupported_format_code():
    data = bytearray(write_segy(np.zeros((4, 1)), 1000))
    struct.pack_into(">H", data, BIN_FORMAT_CODE, 3)
    with pytest.raises(FormatError, match="format code 3"):
        read_segy(bytes(data))


def test_truncated_samples_report_offset():
    data = write_segy(np.ones((4, 2)), 1000)
    with pytest.raises(FormatError, match="byte offset 4096"):
        read_segy(data[:-2])


def test_truncated_trace_header():
    data = write_segy(np.ones((4, 1)), 1000)
    with pytest.raises(FormatError, match="Truncated trace header at byte offset 3600"):
        read_segy(data[:3700])


def test_short_file_is_rejected():
    with pytest.raises(FormatError, match="at least 3600"):
        read_segy(b"\x00" * 100)


def test_write_rejects_unsupported_code():
    with pytest.raises(FormatError, match="Unsupported"):
        write_segy(np.zeros((4, 1)), 1000, format_code=8)
