import numpy as np
import pytest

from experiments.replicas import log_checkpoints, record_points, run_replicas, shard
from walks import (
    DomainError,
    InitialHistory,
    RepulsionParams,
    RngStreamSpec,
    WalkEnsemble,
    initial_state,
    pi_array,
    step,
    trace_walk,
)
from walks.ensemble import BUFFER_DOUBLES, DEFAULT_BLOCK


def test_stream_depends_only_on_seed_and_id():
    a = RngStreamSpec(11, 3).generator().random(5)
    b = RngStreamSpec(11, 3).generator().random(5)
    c = RngStreamSpec(11, 4).generator().random(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_seed_range_is_checked():
    with pytest.raises(DomainError):
        RngStreamSpec(-1)
    with pytest.raises(DomainError):
        RngStreamSpec(2**64)


def test_ensemble_matches_scalar_stepping(history):
    params = RepulsionParams(2.5)
    ensemble = WalkEnsemble(params, history, [4], seed=99)
    ensemble.advance(300)

    draws = RngStreamSpec(99, 4).generator().random((4096, 2))
    state = initial_state(history)
    for k in range(300 - history.n0):
        state = step(state, params, draws[k])
    assert ensemble.counts[0].tolist() == list(state.counts)
    assert ensemble.positions[0].tolist() == list(state.positions)


def test_replica_path_ignores_grouping_and_block_size(history):
    params = RepulsionParams(1.0)
    together = WalkEnsemble(params, history, range(6), seed=5)
    alone = WalkEnsemble(params, history, [4], seed=5, block=7)
    together.advance(1500)
    alone.advance(1500)
    assert np.array_equal(together.counts[4], alone.counts[0])
    assert np.array_equal(together.returns[4], alone.returns[0])


def test_advance_cannot_go_back(history):
    ensemble = WalkEnsemble(RepulsionParams(1.0), history, [0], seed=0)
    ensemble.advance(10)
    with pytest.raises(DomainError):
        ensemble.advance(5)


def test_returns_and_extremes_for_simple_walk():
    history = InitialHistory(counts=(1, 1, 1, 1))
    ensemble = WalkEnsemble(RepulsionParams(0.0), history, range(20), seed=3, burn_in=10)
    ensemble.advance(5000)
    assert np.all(ensemble.returns >= 0)
    assert np.median(ensemble.returns) > 10
    assert np.all(ensemble.scaled_max >= ensemble.scaled_min)
    assert np.all(np.abs(ensemble.scaled_max) <= np.sqrt(5000))


def test_trace_walk_replays_the_ensemble(history):
    params = RepulsionParams(3.0)
    trace = trace_walk(params, history, 400, seed=21, stream_id=2, walk=1)
    ensemble = WalkEnsemble(params, history, [2], seed=21)
    ensemble.advance(400)

    assert trace.first_step == history.n0
    assert trace.uniforms.size == 400 - history.n0
    assert trace.positions.size == trace.uniforms.size + 1
    assert trace.positions[-1] == ensemble.positions[0, 1]
    moves = np.diff(trace.positions)
    assert np.array_equal(moves == 1, trace.uniforms < trace.probabilities)


def test_checkpoints_are_powers_of_root_ten():
    assert log_checkpoints(1, 1000) == (3, 10, 32, 100, 316, 1000)
    assert log_checkpoints(1, 500)[-1] == 500


def test_record_points_include_both_ends():
    assert record_points(1, 10, 4) == (1, 4, 8, 10)
    assert record_points(1, 10, 0) == ()


def test_shards_cover_ids_once():
    parts = shard(range(10), 3)
    assert [i for part in parts for i in part] == list(range(10))
    assert len(parts) == 3
    assert len(shard(range(2), 8)) == 2


def test_run_replicas_is_independent_of_workers(history):
    params = RepulsionParams(4.0)
    serial = run_replicas(params, history, 13, range(5), 800, workers=1)
    pooled = run_replicas(params, history, 13, range(5), 800, workers=2)
    assert [r.replica_id for r in pooled] == list(range(5))
    for a, b in zip(serial, pooled):
        assert np.array_equal(a.final_positions, b.final_positions)
        assert np.array_equal(a.final_x, b.final_x)


def test_shuffled_ids_give_same_per_replica_results(history):
    params = RepulsionParams(1.0)
    ordered = run_replicas(params, history, 2, [0, 1, 2, 3], 600)
    shuffled = run_replicas(params, history, 2, [3, 1, 0, 2], 600)
    for a, b in zip(ordered, shuffled):
        assert a.replica_id == b.replica_id
        assert np.array_equal(a.returns, b.returns)


def test_speeds_measure_displacement_after_history():
    history = InitialHistory(counts=(0, 3, 0, 3), start_positions=(10, 0))
    record = run_replicas(RepulsionParams(0.0), history, 1, [0], 103)[0]
    origin = np.array([13, 3])
    assert record.speeds(history) == pytest.approx((record.final_positions - origin) / 103)


def test_noise_averages_to_zero_across_replicas():
    params = RepulsionParams(3.0)
    history = InitialHistory(counts=(3, 2, 1, 4))
    replicas = 10_000
    ensemble = WalkEnsemble(params, history, range(replicas), seed=31)
    ensemble.advance(40)
    pi = pi_array(ensemble.occupation(), params.beta)
    before = ensemble.counts.copy()
    ensemble.advance(41)
    noise = (ensemble.counts - before) - pi
    assert np.allclose(noise[:, 0] + noise[:, 1], 0.0)
    assert np.allclose(noise[:, 2] + noise[:, 3], 0.0)
    assert np.all(np.abs(noise.mean(axis=0)) < 4.0 / np.sqrt(replicas))


def test_draw_buffer_is_bounded_for_large_ensembles(history):
    params = RepulsionParams(1.0)
    single = WalkEnsemble(params, history, [0], seed=8)
    large = WalkEnsemble(params, history, range(2000), seed=8)
    assert single.block == DEFAULT_BLOCK
    assert large.block < DEFAULT_BLOCK
    assert 2 * large.block * len(large) <= BUFFER_DOUBLES
    single.advance(1200)
    large.advance(1200)
    assert np.array_equal(single.counts[0], large.counts[0])
