"""Per-game random streams.

Every simulated game (or walk) owns one counter-based Philox stream keyed by
``SeedSequence(master_seed, spawn_key=(stream_id,))``.  Draws are taken in
blocks of ``BLOCK`` steps in a fixed order, so a trace depends only on
``(master_seed, stream_id)`` and the game inputs, never on how many games
run alongside it or on thread scheduling.
"""
from dataclasses import dataclass

import numpy as np

BLOCK = 256


@dataclass(frozen=True)
class RngSpec:
    master_seed: int
    stream_id: int = 0

    def generator(self, offset=0):
        ss = np.random.SeedSequence(self.master_seed, spawn_key=(self.stream_id + offset,))
        return np.random.Generator(np.random.Philox(ss))


def as_rng(rng):
    if isinstance(rng, RngSpec):
        return rng
    return RngSpec(int(rng))


class StreamBank:
    """Lazily created generators for streams ``base, base + 1, ...``."""

    def __init__(self, rng, count):
        self.rng = as_rng(rng)
        self.count = count
        self._gens = {}

    def _gen(self, k):
        g = self._gens.get(k)
        if g is None:
            g = self._gens[k] = self.rng.generator(k)
        return g

    def uniforms(self, ids, width):
        """Next block of uniforms for each stream in ``ids``: shape (len, BLOCK, width)."""
        out = np.empty((len(ids), BLOCK, width))
        for row, k in enumerate(ids):
            out[row] = self._gen(int(k)).random((BLOCK, width))
        return out

    def normals(self, ids, width):
        out = np.empty((len(ids), BLOCK, width))
        for row, k in enumerate(ids):
            out[row] = self._gen(int(k)).standard_normal((BLOCK, width))
        return out

    def release(self, ids):
        for k in ids:
            self._gens.pop(int(k), None)
