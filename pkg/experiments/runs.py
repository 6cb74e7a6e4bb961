"""Experiment runners. Each returns a RunResult; nothing here touches the disk."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple

import numpy as np
import pandas as pd

from analysis.coupling import (
    MIN_CLT_REPLICAS,
    CouplingSpec,
    Direction,
    domination_check,
    drift_limit,
    drift_ratio,
    envelope_fraction,
    excursion_fraction,
    ks_distance,
    sample_ensemble,
    sigma,
    synthetic_trace,
)
from analysis.equilibria import EquilibriumReport, critical_w, grid_scan_root, solve_equilibria
from analysis.field import field_array
from analysis.flow import (
    attraction_rate,
    boundary_inward_check,
    flow_paths,
    integrate,
    stays_in_domain,
    variational_area,
)
from experiments.config import CRITICAL_BETA, ExperimentConfig
from experiments.replicas import ReplicaRecord, log_checkpoints, run_replicas
from experiments.reporting import summary_document, trajectory_filename, trajectory_frame
from walks.ensemble import trace_walk
from walks.errors import LabError
from walks.process import OccupationState, RepulsionParams, interpolated_times
from walks.rng import RngStreamSpec

logger = logging.getLogger(__name__)

CENTER = np.full(4, 0.5)
SPEED_TOL = 0.05
SPLIT_RANGE = (0.35, 0.65)
NEAR_ASYMMETRIC_TOL = 0.05
BOUNDARY_SAMPLES = 1000
RATE_START = OccupationState(0.6, 0.4, 0.45, 0.55)
DOMINATION_REPLICAS = 1000


@dataclass
class RunResult:
    summary: dict
    tables: Dict[str, pd.DataFrame] = field(default_factory=dict)


def _replica_ids(config: ExperimentConfig):
    return range(config.replicas)


def _simulate_records(config: ExperimentConfig, record_every: int = 0, checkpoints=()) -> List[ReplicaRecord]:
    return run_replicas(
        config.params,
        config.history,
        config.seed,
        _replica_ids(config),
        config.steps,
        workers=config.workers,
        record_every=record_every,
        checkpoints=tuple(checkpoints),
        burn_in=config.burn_in,
    )


def replica_summaries(records: List[ReplicaRecord], report: EquilibriumReport) -> List[dict]:
    """Per-replica summary dicts: finals, returns, nearest equilibrium."""
    finals = np.array([r.final_x for r in records])
    index, nearest = report.nearest(finals)
    to_center = np.abs(finals - CENTER).sum(axis=1)
    return [
        {
            "replica_id": r.replica_id,
            "final_n": r.final_n,
            "final_S1": int(r.final_positions[0]),
            "final_S2": int(r.final_positions[1]),
            "final_X": r.final_x.tolist(),
            "returns_to_start": r.returns.tolist(),
            "dist_to_center": float(to_center[k]),
            "dist_to_nearest_equilibrium": float(nearest[k]),
            "classified_equilibrium": int(index[k]),
        }
        for k, r in enumerate(records)
    ]


def _document(config: ExperimentConfig, report, replicas, aggregates) -> dict:
    equilibria = report.to_dicts() if report is not None else []
    return summary_document(config.to_dict(), equilibria, replicas, aggregates)


def _loglog_slope(n: np.ndarray, values: np.ndarray) -> float:
    slope, _ = np.polyfit(np.log(n), np.log(values), 1)
    return float(slope)


def target_slope(beta: float) -> float:
    """-min(1/2, 1 - beta/2), the predicted log-log slope of the distance to x*."""
    return -min(0.5, 1.0 - beta / 2.0)


def distance_slope(records: List[ReplicaRecord], checkpoints, steps: int):
    """Mean L1 distance to x* per checkpoint and its log-log slope over the last two decades."""
    distances = np.array([np.abs(r.checkpoint_x - CENTER).sum(axis=1) for r in records])
    mean_distance = distances.mean(axis=0)
    n = np.array(checkpoints, dtype=float)
    tail = (n >= steps / 100.0) & (mean_distance > 0)
    slope = _loglog_slope(n[tail], mean_distance[tail]) if tail.sum() >= 2 else float("nan")
    return mean_distance, slope


class RecurrenceProxies(NamedTuple):
    returns: np.ndarray  # (replicas, checkpoints, 2)
    excursions: np.ndarray  # (replicas, 2): max S/sqrt(n) >= c and min <= -c
    early: int
    grew: np.ndarray  # (replicas, 2)


def recurrence_proxies(records: List[ReplicaRecord], checkpoints, steps: int, c: float) -> RecurrenceProxies:
    """Finite-horizon recurrence proxies from checkpointed replicas."""
    returns = np.array([r.checkpoint_returns for r in records])
    highs = np.array([r.scaled_max for r in records])
    lows = np.array([r.scaled_min for r in records])
    early = int(np.searchsorted(checkpoints, max(steps // 100, 1)))
    early = min(early, len(checkpoints) - 1)
    return RecurrenceProxies(
        returns=returns,
        excursions=(highs >= c) & (lows <= -c),
        early=early,
        grew=returns[:, -1, :] > returns[:, early, :],
    )


def run_equilibria(config: ExperimentConfig) -> RunResult:
    """Equilibria, spectra, residuals and, for beta > 2, w and w*."""
    params = config.params
    report = solve_equilibria(params)
    residuals = [float(np.abs(field_array(e.point.as_array(), params.beta)).sum()) for e in report.equilibria]
    aggregates = {
        "count": report.count,
        "center_stability": report.center.spectrum.stability.value,
        "non_hyperbolic": report.non_hyperbolic,
        "max_residual_l1": max(residuals),
    }
    if params.beta > CRITICAL_BETA:
        aggregates["w"] = report.equilibria[1].w
        aggregates["w_critical"] = critical_w(params)
        aggregates["w_grid_scan"] = grid_scan_root(params)
    return RunResult(_document(config, report, [], aggregates))


def run_simulate(config: ExperimentConfig) -> RunResult:
    """Trajectories of every replica plus up-step fractions and classifications."""
    params = config.params
    warnings = []
    if params.beta == CRITICAL_BETA:
        warnings.append("beta = 2 sits at the critical point where convergence is not established; the run is descriptive only")
        logger.warning(warnings[-1])
    report = solve_equilibria(params)
    records = _simulate_records(config, record_every=config.record_every)
    replicas = replica_summaries(records, report)

    walked = config.steps - config.history.n0
    finals = np.array([r.final_x for r in records])
    displacement = np.array([r.speeds(config.history) * r.final_n for r in records])
    up_fraction = (displacement + walked) / (2.0 * walked)

    aggregates = {
        "warnings": warnings,
        "mean_up_fraction": up_fraction.mean(axis=0).tolist(),
        "mean_dist_to_center": float(np.mean([r["dist_to_center"] for r in replicas])),
        "classification_counts": np.bincount(
            [r["classified_equilibrium"] for r in replicas], minlength=report.count
        ).tolist(),
        "ode_time": float(interpolated_times(config.steps)[0]),
    }
    if params.beta > CRITICAL_BETA:
        w = report.equilibria[1].w
        near = np.minimum(np.abs(finals[:, 1] - w), np.abs(finals[:, 1] - (1 - w))) < NEAR_ASYMMETRIC_TOL
        aggregates["x1r_near_asymmetric_fraction"] = float(near.mean())

    tables = {trajectory_filename(r.replica_id): trajectory_frame(r.trajectory) for r in records}
    return RunResult(_document(config, report, replicas, aggregates), tables)


def run_transience(config: ExperimentConfig) -> RunResult:
    """Terminal speeds for beta > 2 against 1 - 2w."""
    params = config.params
    report = solve_equilibria(params)
    w = report.equilibria[1].w
    records = _simulate_records(config)
    speeds = np.array([r.speeds(config.history) for r in records])

    opposite = float(np.mean(speeds[:, 0] * speeds[:, 1] < 0))
    mean_abs_speed = float(np.abs(speeds).mean())
    target = 1.0 - 2.0 * w
    split = float(np.mean(speeds[:, 0] > 0))
    aggregates = {
        "opposite_sign_fraction": opposite,
        "mean_abs_speed": mean_abs_speed,
        "target_speed": target,
        "walk1_up_fraction": split,
        "passed": {
            "opposite_sign": opposite >= config.required_fraction,
            "speed": abs(mean_abs_speed - target) <= SPEED_TOL,
            "direction_split": SPLIT_RANGE[0] <= split <= SPLIT_RANGE[1],
        },
    }
    replicas = replica_summaries(records, report)
    for summary, speed in zip(replicas, speeds):
        summary["speeds"] = speed.tolist()
    return RunResult(_document(config, report, replicas, aggregates))


def run_recurrence(config: ExperimentConfig) -> RunResult:
    """Returns to the start level and two-sided excursions of S^i_n / sqrt(n) at log checkpoints."""
    params = config.params
    report = solve_equilibria(params)
    checkpoints = log_checkpoints(config.history.n0, config.steps)
    records = _simulate_records(config, checkpoints=checkpoints)
    proxies = recurrence_proxies(records, checkpoints, config.steps, config.threshold_c)
    returns, early = proxies.returns, proxies.early
    excursions = proxies.excursions.mean(axis=0)

    aggregates = {
        "checkpoints": list(checkpoints),
        "median_returns": np.median(returns, axis=0).tolist(),
        "excursion_fraction": excursions.tolist(),
        "comparison_checkpoint": checkpoints[early],
        "returns_grew_fraction": proxies.grew.mean(axis=0).tolist(),
        "threshold_c": config.threshold_c,
        "exploratory": params.beta > 1,
        "passed": {
            "excursions": bool(np.all(excursions >= config.required_fraction)),
            "median_returns_grow": bool(
                np.all(np.median(returns[:, -1, :], axis=0) > np.median(returns[:, early, :], axis=0))
            ),
        },
    }
    replicas = replica_summaries(records, report)
    for summary, record in zip(replicas, records):
        summary["scaled_max"] = record.scaled_max.tolist()
        summary["scaled_min"] = record.scaled_min.tolist()
    return RunResult(_document(config, report, replicas, aggregates))


def run_rate(config: ExperimentConfig) -> RunResult:
    """Log-log slope of the mean distance to x* against n."""
    params = config.params
    report = solve_equilibria(params)
    checkpoints = log_checkpoints(config.history.n0, config.steps)
    records = _simulate_records(config, checkpoints=checkpoints)
    mean_distance, slope = distance_slope(records, checkpoints, config.steps)
    aggregates = {
        "checkpoints": list(checkpoints),
        "mean_distance": mean_distance.tolist(),
        "slope": slope,
        "target_slope": target_slope(params.beta),
        "exploratory": params.beta > 1,
    }
    return RunResult(_document(config, report, replica_summaries(records, report), aggregates))


def run_nonconvergence(config: ExperimentConfig) -> RunResult:
    """Fraction of replicas still near the center for beta > 2."""
    params = config.params
    report = solve_equilibria(params)
    records = _simulate_records(config)
    replicas = replica_summaries(records, report)
    to_center = np.array([r["dist_to_center"] for r in replicas])
    classified = np.array([r["classified_equilibrium"] for r in replicas])
    off_center = classified != 0
    aggregates = {
        "epsilon_center": config.epsilon_center,
        "near_center_fraction": float(np.mean(to_center < config.epsilon_center)),
        "classification_counts": np.bincount(classified, minlength=report.count).tolist(),
        "off_center_classified_stable": bool(
            all(report.equilibria[k].spectrum.stability.value == "linearly-stable" for k in classified[off_center])
        ),
    }
    return RunResult(_document(config, report, replicas, aggregates))


def run_flow(config: ExperimentConfig) -> RunResult:
    """Certified flows from random starts plus boundary, area and rate checks."""
    params = config.params
    report = solve_equilibria(params)
    generator = RngStreamSpec(config.seed, 0).generator()
    starts = generator.random((config.replicas, 2))

    rows, finals, gaps = [], [], []
    for k, (u, v) in enumerate(starts):
        trajectory = integrate(OccupationState.from_planar(u, v), params, config.t_max, config.dt)
        keep = np.arange(0, trajectory.times.size, config.record_every)
        if keep[-1] != trajectory.times.size - 1:
            keep = np.append(keep, trajectory.times.size - 1)
        lifted = trajectory.lifted()[keep]
        rows.append(np.column_stack([np.full(keep.size, k), trajectory.times[keep], lifted]))
        finals.append(lifted[-1])
        gaps.append(trajectory.halving_gap)

    index, nearest = report.nearest(np.array(finals))
    _, paths = flow_paths(starts, params, config.t_max, config.dt)
    area = variational_area(OccupationState.from_planar(*starts[0]), params, min(config.t_max, 5.0), config.dt)
    aggregates = {
        "max_halving_gap": max(gaps),
        "max_dist_to_nearest_equilibrium": float(nearest.max()),
        "classification_counts": np.bincount(index, minlength=report.count).tolist(),
        "boundary_inward": boundary_inward_check(params, BOUNDARY_SAMPLES),
        "stays_in_domain": stays_in_domain(paths),
        "variational_det_final": float(area[-1]),
        "variational_det_expected": float(np.exp(-2.0 * min(config.t_max, 5.0))),
    }
    if params.beta < CRITICAL_BETA:
        aggregates["attraction_rate"] = attraction_rate(params, RATE_START, config.t_max, config.dt)
        aggregates["target_rate"] = 1.0 - params.beta / 2.0

    table = pd.DataFrame(np.vstack(rows), columns=["start_id", "t", "X1l", "X1r", "X2l", "X2r"])
    table["start_id"] = table["start_id"].astype(np.int64)
    return RunResult(_document(config, report, [], aggregates), {"flow.csv": table})


def _coupling_spec(config: ExperimentConfig) -> CouplingSpec:
    return CouplingSpec(
        b=config.coupling_b,
        m=config.coupling_m,
        z0=config.coupling_z0,
        direction=Direction(config.coupling_direction),
        rho=config.coupling_rho,
    )


def run_coupling(config: ExperimentConfig) -> RunResult:
    """Z_n ensemble: drift, excursions, KS distance and domination."""
    spec = _coupling_spec(config)
    n = config.steps
    ensemble = sample_ensemble(spec, n, config.seed, _replica_ids(config))
    scale = sigma(spec, n)
    normalised = ensemble.final / scale
    c = config.threshold_c
    # against the drift: highs for the lower law, lows for the upper one
    against_max = spec.direction is not Direction.UPPER
    extremes = ensemble.running_max if against_max else ensemble.running_min
    excursions = excursion_fraction(extremes, c, upper=against_max)

    aggregates = {
        "sigma_n": scale,
        "mean_normalised_final": float(normalised.mean()),
        "threshold_c": c,
        "excursion_fraction": excursions,
        "passed": {"excursions": excursions >= config.required_fraction},
    }
    if spec.direction is not Direction.SYMMETRIC and spec.rho == 0.5:
        aggregates["drift_ratio"] = drift_ratio(spec, n)
        try:
            aggregates["drift_limit"] = drift_limit(spec)
        except LabError as exc:
            aggregates["drift_limit_error"] = str(exc)
    if config.replicas >= MIN_CLT_REPLICAS:
        aggregates["ks_distance"] = ks_distance(spec, n, ensemble.final)

    if spec.direction is Direction.LOWER:
        dominated = [
            domination_check(synthetic_trace(n, RngStreamSpec(config.seed, k)), spec)
            for k in range(min(config.replicas, DOMINATION_REPLICAS))
        ]
        aggregates["synthetic_domination_violations"] = int(len(dominated) - sum(dominated))
        trace = trace_walk(config.params, config.history, n, config.seed)
        aggregates["walk_domination"] = domination_check(trace, spec)
        aggregates["walk_envelope_fraction"] = envelope_fraction(trace, spec.b, spec.m)

    table = pd.DataFrame(
        {
            "replica_id": ensemble.replica_ids,
            "Z_N": ensemble.final,
            "Z_N_over_sigma": normalised,
            "running_max": ensemble.running_max,
            "running_min": ensemble.running_min,
        }
    )
    return RunResult(_document(config, None, [], aggregates), {"coupling.csv": table})


SWEEP_COLUMNS = ["beta", "replica_id", "metric", "value", "label"]


def _sweep_rows(config: ExperimentConfig, beta: float):
    """Metric rows for one beta; which experiments contribute depends on where beta sits."""
    params = RepulsionParams(beta)
    report = solve_equilibria(params)
    center = report.center.spectrum.stability.value
    rows = [
        [beta, -1, "equilibrium_count", float(report.count), ""],
        [beta, -1, "center_stable", float(center == "linearly-stable"), center],
    ]
    checkpoints = log_checkpoints(config.history.n0, config.steps)
    records = _simulate_records(config.for_beta(beta), checkpoints=checkpoints)
    replicas = replica_summaries(records, report)
    speeds = np.array([r.speeds(config.history) for r in records])
    near = np.mean([r["dist_to_center"] < config.epsilon_center for r in replicas])
    rows.append([beta, -1, "near_center_fraction", float(near), ""])

    exploratory = "exploratory" if beta > 1 else ""
    if beta < CRITICAL_BETA:
        _, slope = distance_slope(records, checkpoints, config.steps)
        rows.append([beta, -1, "slope", slope, exploratory])
        rows.append([beta, -1, "target_slope", target_slope(beta), exploratory])
    if beta <= 1 or (beta < CRITICAL_BETA and config.exploratory):
        proxies = recurrence_proxies(records, checkpoints, config.steps, config.threshold_c)
        for walk, (excursions, grew) in enumerate(
            zip(proxies.excursions.mean(axis=0), proxies.grew.mean(axis=0)), start=1
        ):
            rows.append([beta, -1, f"excursion_fraction_{walk}", float(excursions), exploratory])
            rows.append([beta, -1, f"returns_grew_fraction_{walk}", float(grew), exploratory])
    if beta > CRITICAL_BETA:
        opposite = float(np.mean(speeds[:, 0] * speeds[:, 1] < 0))
        rows.append([beta, -1, "opposite_sign_fraction", opposite, ""])

    for summary, speed in zip(replicas, speeds):
        rid = summary["replica_id"]
        rows.append([beta, rid, "dist_to_center", summary["dist_to_center"], ""])
        rows.append([beta, rid, "dist_to_nearest_equilibrium", summary["dist_to_nearest_equilibrium"], ""])
        rows.append([beta, rid, "classified_equilibrium", float(summary["classified_equilibrium"]), ""])
        rows.append([beta, rid, "speed_1", float(speed[0]), ""])
        rows.append([beta, rid, "speed_2", float(speed[1]), ""])
    return rows, report


def run_sweep(config: ExperimentConfig) -> RunResult:
    """Equilibria and simulation metrics for every beta of the grid, one long table."""
    rows, per_beta = [], []
    for beta in sorted(set(config.beta_grid)):
        try:
            beta_rows, report = _sweep_rows(config, beta)
            per_beta.append({"beta": beta, "equilibria": report.to_dicts(), "error": None})
        except LabError as exc:
            logger.warning("sweep: beta=%s failed: %s", beta, exc)
            beta_rows = [[beta, -1, "error", float("nan"), str(exc)]]
            per_beta.append({"beta": beta, "equilibria": [], "error": str(exc)})
        rows.extend(beta_rows)
    table = pd.DataFrame(rows, columns=SWEEP_COLUMNS)
    table = table.sort_values(["beta", "replica_id"], kind="mergesort").reset_index(drop=True)
    aggregates = {"betas": per_beta, "rows": int(len(table))}
    return RunResult(summary_document(config.to_dict(), [], [], aggregates), {"sweep.csv": table})
