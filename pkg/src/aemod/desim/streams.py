"""Named random streams derived from one master seed.

Each stochastic process (vehicle arrivals, class draws, each station's
services, each customer class) owns its own generator, so changing one rate
leaves every other stream's draws untouched.
"""
from __future__ import annotations

import zlib

import numpy as np

BLOCK = 4096


def stream_key(name: str) -> int:
    return zlib.crc32(name.encode("utf-8"))


class Streams:
    def __init__(self, seed: int):
        self.seed = int(seed)

    def generator(self, name: str) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed % (1 << 64), spawn_key=(stream_key(name),))
        return np.random.default_rng(ss)

    def exponential(self, name: str, rate: float) -> "ExpStream":
        return ExpStream(self.generator(name), rate)

    def uniform(self, name: str) -> "UniformStream":
        return UniformStream(self.generator(name))


class _Buffered:
    def __init__(self, gen: np.random.Generator):
        self.gen = gen
        self._buf: list[float] = []
        self._pos = 0

    def _refill(self):
        raise NotImplementedError

    def next(self) -> float:
        if self._pos >= len(self._buf):
            self._buf = self._refill().tolist()
            self._pos = 0
        v = self._buf[self._pos]
        self._pos += 1
        return v


class ExpStream(_Buffered):
    """Exponential draws at ``rate``; block-buffered, same sequence as bulk draws."""

    def __init__(self, gen, rate: float):
        super().__init__(gen)
        self.scale = 1.0 / rate

    def _refill(self):
        return self.gen.standard_exponential(BLOCK)

    def next(self) -> float:
        return super().next() * self.scale


class UniformStream(_Buffered):
    def _refill(self):
        return self.gen.random(BLOCK)
