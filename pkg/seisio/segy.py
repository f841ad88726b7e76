"""SEG-Y rev1 subset: fixed-length traces in IBM (code 1) or IEEE (code 5) floats.

Integer header fields are big-endian. Byte positions below are zero-based
offsets of the rev1 one-based positions (3217 -> 3216 and so on).
"""
import math
import struct
from dataclasses import dataclass, field

import numpy as np

from core.errors import FormatError, ShapeError

TEXT_HEADER_BYTES = 3200
BINARY_HEADER_BYTES = 400
TRACE_HEADER_BYTES = 240
FILE_HEADER_BYTES = TEXT_HEADER_BYTES + BINARY_HEADER_BYTES

FORMAT_IBM = 1
FORMAT_IEEE = 5
SUPPORTED_FORMATS = (FORMAT_IBM, FORMAT_IEEE)

# binary header
BIN_SAMPLE_INTERVAL = 3216
BIN_SAMPLES_PER_TRACE = 3220
BIN_FORMAT_CODE = 3224
BIN_REVISION = 3500
BIN_FIXED_LENGTH = 3502

# trace header
TR_SEQUENCE = 0
TR_SAMPLE_COUNT = 114
TR_SAMPLE_INTERVAL = 116
TR_INLINE = 188
TR_CROSSLINE = 192


@dataclass(frozen=True)
class SegyBinaryHeader:
    sample_interval_us: int
    samples_per_trace: int
    format_code: int
    text_header: str = ""


@dataclass
class SegyTraceRecord:
    samples: np.ndarray
    sample_interval_us: int
    inline: int = 0
    crossline: int = 0
    header: bytes = field(default=b"", repr=False)

    @property
    def sample_count(self) -> int:
        return len(self.samples)


def ibm32_to_real(word: int) -> float:
    """Decode one IBM System/360 single-precision word exactly."""
    sign = -1.0 if word >> 31 & 0x1 else 1.0
    exponent = word >> 24 & 0x7F
    fraction = word & 0x00FFFFFF
    if fraction == 0:
        return 0.0 * sign
    # fraction / 2^24 * 16^(exponent - 64)
    return sign * math.ldexp(fraction, 4 * (exponent - 64) - 24)


def real_to_ibm32(value: float) -> int:
    """Nearest IBM word to ``value`` (truncated mantissa; zero for underflow)."""
    if not math.isfinite(value):
        raise ShapeError(f"Cannot encode non-finite value {value} as IBM float")
    if value == 0.0:
        return 0
    sign = 0x80000000 if value < 0 else 0
    mantissa, exp2 = math.frexp(abs(value))  # value = mantissa * 2^exp2, 0.5 <= mantissa < 1
    exp16 = -(-exp2 // 4)
    shift = 4 * exp16 - exp2
    fraction = int(math.ldexp(mantissa, 24 - shift))
    exponent = exp16 + 64
    if exponent > 127:
        raise ShapeError(f"Value {value} overflows the IBM float range")
    if exponent < 0:
        return sign
    return sign | exponent << 24 | fraction


def _decode_samples(block: bytes, format_code: int) -> np.ndarray:
    if format_code == FORMAT_IEEE:
        return np.frombuffer(block, dtype=">f4").astype(np.float64)
    words = np.frombuffer(block, dtype=">u4")
    return np.array([ibm32_to_real(int(w)) for w in words], dtype=np.float64)


def _encode_samples(samples: np.ndarray, format_code: int) -> bytes:
    if format_code == FORMAT_IEEE:
        return np.asarray(samples, dtype=">f4").tobytes()
    return np.array([real_to_ibm32(float(s)) for s in samples], dtype=">u4").tobytes()


def read_segy(data: bytes) -> tuple[SegyBinaryHeader, list[SegyTraceRecord]]:
    if len(data) < FILE_HEADER_BYTES:
        raise FormatError(f"SEG-Y data is {len(data)} bytes, need at least {FILE_HEADER_BYTES} for the file headers")
    text = data[:TEXT_HEADER_BYTES].decode("cp500", errors="replace")
    (interval,) = struct.unpack_from(">H", data, BIN_SAMPLE_INTERVAL)
    (samples_per_trace,) = struct.unpack_from(">H", data, BIN_SAMPLES_PER_TRACE)
    (format_code,) = struct.unpack_from(">H", data, BIN_FORMAT_CODE)
    if format_code not in SUPPORTED_FORMATS:
        raise FormatError(f"Unsupported SEG-Y sample format code {format_code}")
    binary = SegyBinaryHeader(interval, samples_per_trace, format_code, text)

    traces: list[SegyTraceRecord] = []
    offset = FILE_HEADER_BYTES
    while offset < len(data):
        if offset + TRACE_HEADER_BYTES > len(data):
            raise FormatError(f"Truncated trace header at byte offset {offset}")
        header = data[offset:offset + TRACE_HEADER_BYTES]
        (count,) = struct.unpack_from(">H", header, TR_SAMPLE_COUNT)
        (trace_interval,) = struct.unpack_from(">H", header, TR_SAMPLE_INTERVAL)
        (inline,) = struct.unpack_from(">i", header, TR_INLINE)
        (crossline,) = struct.unpack_from(">i", header, TR_CROSSLINE)
        count = count or samples_per_trace
        start = offset + TRACE_HEADER_BYTES
        end = start + 4 * count
        if end > len(data):
            raise FormatError(f"Truncated trace samples at byte offset {start}: need {4 * count} bytes, have {len(data) - start}")
        traces.append(SegyTraceRecord(
            samples=_decode_samples(data[start:end], format_code),
            sample_interval_us=trace_interval or interval,
            inline=inline,
            crossline=crossline,
            header=header,
        ))
        offset = end
    return binary, traces


def _text_header(description: str) -> bytes:
    lines = [f"C{n:2d} {line}"[:80].ljust(80) for n, line in enumerate((description or "").splitlines()[:40] or [""], start=1)]
    lines += [f"C{n:2d}".ljust(80) for n in range(len(lines) + 1, 41)]
    return "".join(lines).encode("cp500")


def write_segy(
    traces: np.ndarray,
    sample_interval_us: int,
    format_code: int = FORMAT_IEEE,
    description: str = "",
    inlines: np.ndarray | None = None,
    crosslines: np.ndarray | None = None,
) -> bytes:
    """Serialize a (samples, traces) section; one SEG-Y trace per column."""
    traces = np.asarray(traces, dtype=np.float64)
    if traces.ndim == 3 and traces.shape[-1] == 1:
        traces = traces[..., 0]
    if traces.ndim != 2:
        raise ShapeError(f"write_segy expects a (samples, traces) section, got {traces.shape}")
    if format_code not in SUPPORTED_FORMATS:
        raise FormatError(f"Unsupported SEG-Y sample format code {format_code}")
    samples, count = traces.shape
    if samples > 0xFFFF:
        raise ShapeError(f"{samples} samples per trace exceed the 16-bit header field")

    binary = bytearray(BINARY_HEADER_BYTES)
    struct.pack_into(">H", binary, BIN_SAMPLE_INTERVAL - TEXT_HEADER_BYTES, sample_interval_us)
    struct.pack_into(">H", binary, BIN_SAMPLES_PER_TRACE - TEXT_HEADER_BYTES, samples)
    struct.pack_into(">H", binary, BIN_FORMAT_CODE - TEXT_HEADER_BYTES, format_code)
    struct.pack_into(">H", binary, BIN_REVISION - TEXT_HEADER_BYTES, 0x0100)
    struct.pack_into(">H", binary, BIN_FIXED_LENGTH - TEXT_HEADER_BYTES, 1)

    parts = [_text_header(description), bytes(binary)]
    for index in range(count):
        header = bytearray(TRACE_HEADER_BYTES)
        struct.pack_into(">i", header, TR_SEQUENCE, index + 1)
        struct.pack_into(">H", header, TR_SAMPLE_COUNT, samples)
        struct.pack_into(">H", header, TR_SAMPLE_INTERVAL, sample_interval_us)
        struct.pack_into(">i", header, TR_INLINE, int(inlines[index]) if inlines is not None else 1)
        struct.pack_into(">i", header, TR_CROSSLINE, int(crosslines[index]) if crosslines is not None else index + 1)
        parts.append(bytes(header))
        parts.append(_encode_samples(traces[:, index], format_code))
    return b"".join(parts)


def section_from_traces(traces: list[SegyTraceRecord]) -> np.ndarray:
    """Stack records into a (time, trace, 1) grid; all traces must share a length."""
    if not traces:
        raise ShapeError("No traces to stack")
    lengths = {trace.sample_count for trace in traces}
    if len(lengths) != 1:
        raise ShapeError(f"Traces have differing sample counts {sorted(lengths)}")
    return np.stack([trace.samples for trace in traces], axis=1)[..., None]
