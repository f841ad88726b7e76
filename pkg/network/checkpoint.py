"""Binary checkpoint format.

    b"OSN1"
    u32   length of the JSON block
    bytes JSON: {"network": NetworkConfig, "fingerprint": str, "metadata": {...}}
    u32   parameter count
    per parameter:
        u16 name length, name (utf-8), u8 ndim, ndim x u32 dims,
        u8 kind (0 real, 1 complex), payload as little-endian f32
        (complex entries interleaved real, imag)

All integers are little-endian. Float32 parameters round-trip bit-exactly.
"""
import json
import logging
import struct
from pathlib import Path

import numpy as np

from core.errors import FormatError
from core.grid import precision
from core.rng import RngState
from network.models import ModelState, NetworkConfig
from network.orthoseisnet import init_params

logger = logging.getLogger(__name__)

MAGIC = b"OSN1"


def checkpoint_bytes(model: ModelState) -> bytes:
    header = json.dumps(
        {
            "network": model.config.model_dump(mode="json"),
            "fingerprint": model.fingerprint,
            "metadata": model.metadata,
        },
        sort_keys=True,
    ).encode("utf-8")
    params = list(model.named_parameters())
    chunks = [MAGIC, struct.pack("<I", len(header)), header, struct.pack("<I", len(params))]
    for name, param in params:
        encoded = name.encode("utf-8")
        chunks.append(struct.pack("<H", len(encoded)))
        chunks.append(encoded)
        chunks.append(struct.pack("<B", param.ndim))
        chunks.append(struct.pack(f"<{param.ndim}I", *param.shape))
        if param.is_complex:
            chunks.append(struct.pack("<B", 1))
            payload = np.ascontiguousarray(param.value, dtype="<c8").view("<f4")
        else:
            chunks.append(struct.pack("<B", 0))
            payload = np.ascontiguousarray(param.value, dtype="<f4")
        chunks.append(payload.tobytes())
    return b"".join(chunks)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.offset = 0

    def take(self, size: int, what: str) -> bytes:
        if self.offset + size > len(self.data):
            raise FormatError(f"Checkpoint truncated while reading {what} at byte {self.offset}")
        chunk = self.data[self.offset:self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, fmt: str, what: str) -> tuple:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))


def model_from_bytes(data: bytes, expected_fingerprint: str | None = None) -> ModelState:
    reader = _Reader(data)
    magic = reader.take(4, "magic")
    if magic != MAGIC:
        raise FormatError(f"Not a checkpoint: magic {magic!r}, expected {MAGIC!r}")
    (header_length,) = reader.unpack("<I", "header length")
    try:
        header = json.loads(reader.take(header_length, "config block").decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"Checkpoint config block is not valid JSON: {exc}") from exc

    config = NetworkConfig.model_validate(header["network"])
    if header.get("fingerprint") != config.fingerprint:
        raise FormatError(
            f"Checkpoint fingerprint {header.get('fingerprint')} does not match its config ({config.fingerprint})"
        )
    if expected_fingerprint is not None and expected_fingerprint != config.fingerprint:
        raise FormatError(f"Architecture fingerprint mismatch: checkpoint {config.fingerprint}, expected {expected_fingerprint}")

    arrays: dict[str, np.ndarray] = {}
    (count,) = reader.unpack("<I", "parameter count")
    for _ in range(count):
        (name_length,) = reader.unpack("<H", "name length")
        name = reader.take(name_length, "parameter name").decode("utf-8")
        (ndim,) = reader.unpack("<B", f"{name} rank")
        shape = reader.unpack(f"<{ndim}I", f"{name} shape")
        (kind,) = reader.unpack("<B", f"{name} kind")
        size = int(np.prod(shape, dtype=np.int64))
        if kind == 1:
            raw = np.frombuffer(reader.take(8 * size, f"{name} payload"), dtype="<c8")
        elif kind == 0:
            raw = np.frombuffer(reader.take(4 * size, f"{name} payload"), dtype="<f4")
        else:
            raise FormatError(f"Parameter {name} has unknown kind code {kind}")
        arrays[name] = raw.reshape(shape).astype(np.complex64 if kind == 1 else np.float32)
    if reader.offset != len(data):
        raise FormatError(f"Checkpoint has {len(data) - reader.offset} trailing bytes")

    with precision("float32"):
        model = init_params(config, RngState(0))
    expected = {name for name, _ in model.named_parameters()}
    if expected != set(arrays):
        raise FormatError(f"Checkpoint parameters differ from the architecture: {sorted(expected ^ set(arrays))[:5]}")
    model.restore(arrays)
    model.metadata = header.get("metadata", {})
    return model


def save_checkpoint(model: ModelState, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(checkpoint_bytes(model))
    logger.info(f"💾 Saved checkpoint {path} ({model.fingerprint})")
    return path


def load_checkpoint(path: Path, expected_fingerprint: str | None = None) -> ModelState:
    return model_from_bytes(Path(path).read_bytes(), expected_fingerprint)
