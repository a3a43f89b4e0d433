"""Seeded random streams.

Every run derives its randomness from one 64-bit replication seed. The seed
feeds a ``SeedSequence`` and each named purpose gets its own spawn key, so the
streams are independent and adding draws to one never shifts another. The bit
generator is Philox (counter-based, 64-bit words).
"""

from __future__ import annotations

import numpy as np

STREAM_KEYS = {"instance": 0, "gate": 1, "rounding": 2}

_MASK64 = (1 << 64) - 1


def stream(seed: int, name: str) -> np.random.Generator:
    """Return the generator for purpose ``name`` under replication ``seed``."""
    try:
        key = STREAM_KEYS[name]
    except KeyError:
        raise ValueError(f"unknown random stream {name!r}") from None
    seq = np.random.SeedSequence(entropy=int(seed) & _MASK64, spawn_key=(key,))
    return np.random.Generator(np.random.Philox(seq))


class Streams:
    """Lazily created per-run generators keyed by purpose."""

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._cache: dict[str, np.random.Generator] = {}

    def __getitem__(self, name: str) -> np.random.Generator:
        if name not in self._cache:
            self._cache[name] = stream(self.seed, name)
        return self._cache[name]

    @property
    def gate(self) -> np.random.Generator:
        return self["gate"]

    @property
    def rounding(self) -> np.random.Generator:
        return self["rounding"]
