"""Deterministic random streams.

Algorithm: numpy PCG64 seeded through ``numpy.random.SeedSequence(seed,
spawn_key=...)``. Child streams are addressed by key path, so the stream a
consumer sees depends only on (seed, keys) and never on how much of the
parent stream was used before.
"""
import zlib
from dataclasses import dataclass, field

import numpy as np

from core.errors import ConfigError

ALGORITHM = "PCG64 via numpy.random.SeedSequence"


def _key_to_int(key: int | str) -> int:
    if isinstance(key, str):
        return zlib.crc32(key.encode("utf-8"))
    if isinstance(key, (int, np.integer)) and key >= 0:
        return int(key)
    raise ConfigError(f"RNG keys must be non-negative ints or strings, got {key!r}")


@dataclass
class RngState:
    seed: int
    spawn_key: tuple[int, ...] = ()
    _generator: np.random.Generator | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError(f"Seed must be a 64-bit unsigned integer, got {self.seed}")
        self.seed = int(self.seed)

    @property
    def generator(self) -> np.random.Generator:
        if self._generator is None:
            sequence = np.random.SeedSequence(self.seed, spawn_key=self.spawn_key)
            self._generator = np.random.Generator(np.random.PCG64(sequence))
        return self._generator

    def child(self, *keys: int | str) -> "RngState":
        """Independent stream for a named subsystem, section index, epoch, ..."""
        return RngState(self.seed, self.spawn_key + tuple(_key_to_int(k) for k in keys))

    def child_seed(self, *keys: int | str) -> int:
        """A plain 63-bit integer seed for recording in manifests."""
        sequence = np.random.SeedSequence(self.seed, spawn_key=self.child(*keys).spawn_key)
        return int(sequence.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))
