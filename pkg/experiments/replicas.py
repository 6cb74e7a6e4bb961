"""Replica-parallel evolution of the walk pair.

Replica ids are split into contiguous shards, each shard runs as one
WalkEnsemble (in-process or in a multiprocessing pool), and the records are
sorted by replica id before anyone aggregates them.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from multiprocessing import Pool
from typing import List, Optional, Tuple

import numpy as np

from walks.ensemble import WalkEnsemble
from walks.process import InitialHistory, RepulsionParams

logger = logging.getLogger(__name__)

TRAJECTORY_COLUMNS = ["n", "S1", "S2", "X1l", "X1r", "X2l", "X2r"]


@dataclass(frozen=True)
class ShardTask:
    params: RepulsionParams
    history: InitialHistory
    seed: int
    replica_ids: Tuple[int, ...]
    steps: int
    record_every: int = 0
    checkpoints: Tuple[int, ...] = ()
    burn_in: int = 0


@dataclass
class ReplicaRecord:
    replica_id: int
    final_n: int
    final_positions: np.ndarray
    final_x: np.ndarray
    returns: np.ndarray
    scaled_max: np.ndarray
    scaled_min: np.ndarray
    checkpoint_returns: np.ndarray
    checkpoint_x: np.ndarray
    trajectory: Optional[np.ndarray] = None

    def speeds(self, history: InitialHistory) -> np.ndarray:
        """(S^i_N - S^i_{n0}) / N for both walks."""
        l1, r1, l2, r2 = history.counts
        s1, s2 = history.start_positions
        origin = np.array([s1 + r1 - l1, s2 + r2 - l2])
        return (self.final_positions - origin) / self.final_n


def log_checkpoints(first: int, steps: int) -> Tuple[int, ...]:
    """Powers of sqrt(10), rounded, strictly after ``first`` and up to ``steps`` (always included)."""
    points = set()
    k = 0
    while True:
        value = int(round(10 ** (k / 2)))
        if value > steps:
            break
        if value > first:
            points.add(value)
        k += 1
    points.add(steps)
    return tuple(sorted(points))


def record_points(first: int, steps: int, every: int) -> Tuple[int, ...]:
    """Steps at which trajectories are sampled: first, every ``every``, last."""
    if every <= 0:
        return ()
    points = {first, steps}
    points.update(range(every * (first // every + 1), steps + 1, every))
    return tuple(sorted(p for p in points if first <= p <= steps))


def run_shard(task: ShardTask) -> List[ReplicaRecord]:
    """Run one shard of replicas as a single ensemble and collect records."""
    ensemble = WalkEnsemble(task.params, task.history, task.replica_ids, task.seed, burn_in=task.burn_in)
    first = ensemble.n
    recorded = record_points(first, task.steps, task.record_every)
    stops = sorted(set(recorded) | set(task.checkpoints) | {task.steps})

    rows = []
    checkpoint_returns, checkpoint_x = [], []
    for n in stops:
        ensemble.advance(n)
        x = ensemble.occupation()
        if n in task.checkpoints:
            checkpoint_returns.append(ensemble.returns.copy())
            checkpoint_x.append(x)
        if n in recorded:
            positions = ensemble.positions
            block = np.column_stack([np.full(len(ensemble), n), positions, x])
            rows.append(block)
    logger.debug("shard %s..%s finished at n=%d", task.replica_ids[0], task.replica_ids[-1], ensemble.n)

    size = len(ensemble)
    x_final = ensemble.occupation()
    cp_returns = np.stack(checkpoint_returns, axis=1) if checkpoint_returns else np.zeros((size, 0, 2))
    cp_x = np.stack(checkpoint_x, axis=1) if checkpoint_x else np.zeros((size, 0, 4))
    trajectories = np.stack(rows, axis=1) if rows else None

    records = []
    for k, replica_id in enumerate(ensemble.replica_ids):
        records.append(
            ReplicaRecord(
                replica_id=int(replica_id),
                final_n=ensemble.n,
                final_positions=ensemble.positions[k].copy(),
                final_x=x_final[k].copy(),
                returns=ensemble.returns[k].copy(),
                scaled_max=ensemble.scaled_max[k].copy(),
                scaled_min=ensemble.scaled_min[k].copy(),
                checkpoint_returns=cp_returns[k],
                checkpoint_x=cp_x[k],
                trajectory=None if trajectories is None else trajectories[k],
            )
        )
    return records


def shard(replica_ids, workers: int) -> List[Tuple[int, ...]]:
    """Split replica ids into at most ``workers`` contiguous shards."""
    ids = list(replica_ids)
    count = max(1, min(workers, len(ids)))
    return [tuple(chunk.tolist()) for chunk in np.array_split(np.asarray(ids, dtype=np.int64), count) if chunk.size]


def run_replicas(
    params: RepulsionParams,
    history: InitialHistory,
    seed: int,
    replica_ids,
    steps: int,
    workers: int = 1,
    record_every: int = 0,
    checkpoints: Tuple[int, ...] = (),
    burn_in: int = 0,
) -> List[ReplicaRecord]:
    """Run replicas across worker processes; records come back sorted by id."""
    tasks = [
        ShardTask(params, history, seed, ids, steps, record_every, tuple(checkpoints), burn_in)
        for ids in shard(replica_ids, workers)
    ]
    logger.info("beta=%s: %d replicas to n=%d in %d shard(s)", params.beta, sum(len(t.replica_ids) for t in tasks), steps, len(tasks))
    if len(tasks) == 1:
        results = [run_shard(tasks[0])]
    else:
        with Pool(processes=len(tasks)) as pool:
            results = pool.map(run_shard, tasks)
    records = [record for batch in results for record in batch]
    return sorted(records, key=lambda r: r.replica_id)
