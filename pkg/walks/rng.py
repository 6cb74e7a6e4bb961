"""Reproducible per-replica random streams.

A stream is fully determined by ``(seed, stream_id)``: the seed is the
entropy of a ``numpy.random.SeedSequence`` and the replica index is its
spawn key, so two replicas never share draws and a replica's draws do not
depend on how replicas are grouped across workers.
"""

from dataclasses import dataclass

import numpy as np

from walks.errors import DomainError

MAX_SEED = 2**64 - 1


@dataclass(frozen=True)
class RngStreamSpec:
    seed: int
    stream_id: int = 0

    def __post_init__(self):
        if not 0 <= self.seed <= MAX_SEED:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.stream_id < 0:
            raise DomainError(f"stream_id must be nonnegative, got {self.stream_id}")

    def generator(self) -> np.random.Generator:
        sequence = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.PCG64(sequence))


def open_streams(seed: int, stream_ids) -> list:
    """Return one generator per replica id, in the order given."""
    return [RngStreamSpec(seed, int(i)).generator() for i in stream_ids]
