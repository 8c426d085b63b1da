"""Deterministic, splittable random streams.

Every random draw in the library comes from a Philox counter-based generator
keyed by ``(master_seed, replication, slot)``. A replication can therefore be
regenerated in isolation, in any order and on any worker, with bit-identical
results.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_U64 = (1 << 64) - 1


@dataclass(frozen=True)
class Stream:
    """Handle for the random stream of one replication.

    ``slot`` selects an independent substream; the sampler uses each
    variable's topological index as its slot.
    """

    seed: int
    replication: int = 0

    def generator(self, slot: int) -> np.random.Generator:
        key = np.random.SeedSequence([self.seed & _U64, self.replication, slot])
        return np.random.Generator(np.random.Philox(key))

    def child(self, replication: int) -> Stream:
        return Stream(self.seed, replication)
