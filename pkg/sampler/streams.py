"""Seeded, splittable random streams.

A stream is identified by ``(seed, stream_id)`` plus a derivation path. Two
streams with the same identity produce the same sequence regardless of thread
count or the order in which sibling streams are consumed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_MASK64 = (1 << 64) - 1


@dataclass(eq=False)
class RandomStream:
    seed: int
    stream_id: int = 0
    path: tuple[int, ...] = ()
    _gen: np.random.Generator | None = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.seed = int(self.seed) & _MASK64
        self.stream_id = int(self.stream_id) & _MASK64

    @property
    def gen(self) -> np.random.Generator:
        if self._gen is None:
            seq = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, *self.path))
            self._gen = np.random.Generator(np.random.PCG64(seq))
        return self._gen

    def substream(self, *index: int) -> "RandomStream":
        """Independent child stream; does not advance this stream."""
        return RandomStream(self.seed, self.stream_id, self.path + tuple(int(i) for i in index))

    def with_stream_id(self, stream_id: int) -> "RandomStream":
        return RandomStream(self.seed, stream_id, self.path)

    def identity(self) -> tuple[int, int, tuple[int, ...]]:
        return self.seed, self.stream_id, self.path
