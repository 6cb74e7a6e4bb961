"""Many independent replicas of the walk pair, advanced in lock step.

Replicas are stacked along the first axis and share nothing but the clock:
replica ``k`` draws only from its own stream ``RngStreamSpec(seed, ids[k])``,
two uniforms per step, so its path is the same whichever shard or ensemble
it runs in.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from walks.errors import DomainError
from walks.process import L1, L2, R1, R2, InitialHistory, RepulsionParams, occupation_array, right_probabilities
from walks.rng import open_streams

logger = logging.getLogger(__name__)

DEFAULT_BLOCK = 4096
# Upper bound on buffered uniforms across the whole ensemble (16 MiB of doubles).
BUFFER_DOUBLES = 2**21


class WalkEnsemble:
    def __init__(
        self,
        params: RepulsionParams,
        history: InitialHistory,
        replica_ids,
        seed: int,
        burn_in: int = 0,
        block: Optional[int] = None,
    ):
        self.params = params
        self.history = history
        self.replica_ids = np.asarray(list(replica_ids), dtype=np.int64)
        if self.replica_ids.size == 0:
            raise DomainError("an ensemble needs at least one replica")
        size = self.replica_ids.size

        self.n = history.n0
        self.counts = np.tile(np.asarray(history.counts, dtype=np.int64), (size, 1))
        self.start = np.asarray(history.start_positions, dtype=np.int64)
        self.returns = np.zeros((size, 2), dtype=np.int64)
        self.scaled_max = np.full((size, 2), -np.inf)
        self.scaled_min = np.full((size, 2), np.inf)
        self.burn_in = burn_in

        self._streams = open_streams(seed, self.replica_ids)
        if block is None:
            block = max(1, min(DEFAULT_BLOCK, BUFFER_DOUBLES // (2 * size)))
        if block < 1:
            raise DomainError(f"block must be at least 1, got {block}")
        self.block = block
        self._buffer = np.empty((size, 0, 2))
        self._cursor = 0

    def __len__(self):
        return self.replica_ids.size

    @property
    def positions(self) -> np.ndarray:
        return self.start + self.counts[:, [R1, R2]] - self.counts[:, [L1, L2]]

    def occupation(self) -> np.ndarray:
        """X(n) for every replica, shape (replicas, 4)."""
        return occupation_array(self.counts, self.n)

    def right_probabilities(self) -> np.ndarray:
        return right_probabilities(self.counts, self.n, self.params.beta)

    def _draws(self) -> np.ndarray:
        if self._cursor == self._buffer.shape[1]:
            self._buffer = np.stack([g.random((self.block, 2)) for g in self._streams])
            self._cursor = 0
        u = self._buffer[:, self._cursor, :]
        self._cursor += 1
        return u

    def advance(self, target_n: int, on_step=None) -> None:
        """Evolve every replica up to step ``target_n``.

        ``on_step(n, uniforms, probabilities)`` is called before each step with
        the (replicas, 2) draws and right-step probabilities used for it.
        """
        if target_n < self.n:
            raise DomainError(f"cannot move back from n={self.n} to n={target_n}")
        beta = self.params.beta
        while self.n < target_n:
            u = self._draws()
            p = right_probabilities(self.counts, self.n, beta)
            if on_step is not None:
                on_step(self.n, u, p)
            right = u < p
            self.counts[:, R1] += right[:, 0]
            self.counts[:, L1] += ~right[:, 0]
            self.counts[:, R2] += right[:, 1]
            self.counts[:, L2] += ~right[:, 1]
            self.n += 1

            displacement = self.positions - self.start
            self.returns += displacement == 0
            if self.n > self.burn_in:
                scaled = displacement / np.sqrt(self.n)
                np.maximum(self.scaled_max, scaled, out=self.scaled_max)
                np.minimum(self.scaled_min, scaled, out=self.scaled_min)
        logger.debug("ensemble of %d replicas at n=%d", len(self), self.n)


@dataclass(frozen=True)
class WalkTrace:
    """Per-step record of one walk: the uniform used and its right-step probability.

    ``positions[k]`` is the walk's position at step ``first_step + k``;
    ``uniforms[k]`` and ``probabilities[k]`` drive the move from it.
    """

    walk: int
    first_step: int
    start_position: int
    uniforms: np.ndarray
    probabilities: np.ndarray
    positions: np.ndarray


def trace_walk(
    params: RepulsionParams,
    history: InitialHistory,
    steps: int,
    seed: int,
    stream_id: int = 0,
    walk: int = 0,
) -> WalkTrace:
    """Run one replica to ``steps`` and record walk ``walk``'s uniforms and P_n."""
    if walk not in (0, 1):
        raise DomainError(f"walk must be 0 or 1, got {walk}")
    ensemble = WalkEnsemble(params, history, [stream_id], seed)
    first = ensemble.n
    uniforms, probabilities = [], []

    def record(n, u, p):
        uniforms.append(u[0, walk])
        probabilities.append(p[0, walk])

    positions = [int(ensemble.positions[0, walk])]
    for n in range(first + 1, steps + 1):
        ensemble.advance(n, on_step=record)
        positions.append(int(ensemble.positions[0, walk]))
    return WalkTrace(
        walk=walk,
        first_step=first,
        start_position=int(history.start_positions[walk]),
        uniforms=np.asarray(uniforms),
        probabilities=np.asarray(probabilities),
        positions=np.asarray(positions, dtype=np.int64),
    )
