"""The independent-increment comparison walk Z_n and its coupling with S^i_n.

Z steps up at step n -> n+1 with probability p_n: zero (or one) up to step m,
then 1/2 -/+ min{1/2, b n^-rho}. Both Z and the walk step up iff a shared
uniform falls below their step probability, so whenever p_n <= P_n after
step m the walk dominates Z path by path.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np
from scipy import stats

from walks.ensemble import WalkTrace
from walks.errors import CertificationError, DomainError
from walks.rng import RngStreamSpec

logger = logging.getLogger(__name__)

DRIFT_HORIZON = 10**6
DRIFT_TOL = 0.02
MIN_CLT_REPLICAS = 1000


class Direction(str, Enum):
    LOWER = "lower"
    UPPER = "upper"
    SYMMETRIC = "symmetric"


@dataclass(frozen=True)
class CouplingSpec:
    b: float
    m: int
    z0: int = 0
    direction: Direction = Direction.LOWER
    rho: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "direction", Direction(self.direction))
        if self.direction is not Direction.SYMMETRIC and not self.b > 0:
            raise DomainError(f"b must be positive, got {self.b}")
        if self.m < 0:
            raise DomainError(f"m must be nonnegative, got {self.m}")
        if not self.rho > 0:
            raise DomainError(f"rho must be positive, got {self.rho}")

    @property
    def sign(self) -> int:
        return {Direction.LOWER: -1, Direction.UPPER: 1, Direction.SYMMETRIC: 0}[self.direction]


@dataclass(frozen=True)
class CouplingPath:
    steps: np.ndarray
    sigmas: np.ndarray
    p_schedule: np.ndarray


def p_schedule(spec: CouplingSpec, n: int) -> float:
    """Up-step probability p_n of Z for the step n -> n+1."""
    if n < 0:
        raise DomainError(f"n must be nonnegative, got {n}")
    if spec.direction is Direction.SYMMETRIC:
        return 0.5
    if n <= spec.m:
        return 0.0 if spec.direction is Direction.LOWER else 1.0
    return 0.5 + spec.sign * min(0.5, spec.b / n**spec.rho)


def schedule(spec: CouplingSpec, n_max: int) -> np.ndarray:
    """p_0 .. p_{n_max} as an array."""
    if spec.direction is Direction.SYMMETRIC:
        return np.full(n_max + 1, 0.5)
    n = np.arange(n_max + 1, dtype=float)
    p = np.empty(n_max + 1)
    early = n <= spec.m
    p[early] = 0.0 if spec.direction is Direction.LOWER else 1.0
    late = n[~early]
    p[~early] = 0.5 + spec.sign * np.minimum(0.5, spec.b / late**spec.rho)
    return p


def sigma_series(spec: CouplingSpec, n_max: int) -> np.ndarray:
    """sigma_0 .. sigma_{n_max}, sigma_n = 2 (sum_{k=1}^n p_k (1 - p_k))^(1/2)."""
    p = schedule(spec, n_max)
    variance = np.concatenate([[0.0], np.cumsum(p[1:] * (1.0 - p[1:]))])
    return 2.0 * np.sqrt(variance)


def sigma(spec: CouplingSpec, n: int) -> float:
    """sigma_n = 2 (sum_{k<=n} p_k (1 - p_k))^(1/2)."""
    if n < 1:
        raise DomainError(f"sigma needs n >= 1, got {n}")
    return float(sigma_series(spec, n)[-1])


def expected_position(spec: CouplingSpec, n: int) -> float:
    """E[Z_n] = Z_0 + sum_{k<n} (2 p_k - 1)."""
    p = schedule(spec, max(n - 1, 0))[:n]
    return float(spec.z0 + np.sum(2.0 * p - 1.0))


def drift_ratio(spec: CouplingSpec, n: int) -> float:
    """E[Z_n]/sigma_n in the closed form (Z_0/2 + sum_{k<=n} p_k - n/2) / sqrt(sum p_k (1 - p_k))."""
    p = schedule(spec, n)[1:]
    spread = math.sqrt(float(np.sum(p * (1.0 - p))))
    if spread == 0:
        raise DomainError(f"sigma_n vanishes at n={n}; take n > m")
    return (spec.z0 / 2.0 + float(np.sum(p)) - n / 2.0) / spread


def drift_limit(spec: CouplingSpec, horizon: int = DRIFT_HORIZON, tol: float = DRIFT_TOL) -> float:
    """The limit -4b (lower law) or +4b (upper law) of E[Z_n]/sigma_n, confirmed at ``horizon``."""
    if spec.direction is Direction.SYMMETRIC:
        raise DomainError("the symmetric schedule has no drift limit")
    if spec.rho != 0.5:
        raise DomainError(f"E[Z_n]/sigma_n has a finite limit only for rho = 1/2, got {spec.rho}")
    limit = 4.0 * spec.b * spec.sign
    observed = drift_ratio(spec, horizon)
    if abs(observed - limit) > tol:
        raise CertificationError(f"drift ratio {observed:.4f} at n={horizon} is not within {tol} of {limit}")
    return limit


def _increments(uniforms: np.ndarray, p: np.ndarray) -> np.ndarray:
    return np.where(uniforms < p, 1, -1).astype(np.int64)


def sample_path(spec: CouplingSpec, n_max: int, rng: RngStreamSpec) -> CouplingPath:
    """Z_0 .. Z_{n_max}, stepping up at n -> n+1 iff the n-th uniform is below p_n."""
    if n_max < 1:
        raise DomainError(f"n_max must be at least 1, got {n_max}")
    p = schedule(spec, n_max)
    u = rng.generator().random(n_max)
    steps = spec.z0 + np.concatenate([[0], np.cumsum(_increments(u, p[:-1]))])
    return CouplingPath(steps, sigma_series(spec, n_max), p)


class EnsembleSummary(NamedTuple):
    replica_ids: np.ndarray
    final: np.ndarray
    running_max: np.ndarray
    running_min: np.ndarray


def sample_ensemble(
    spec: CouplingSpec, n_max: int, seed: int, replica_ids, chunk: int = 2**16
) -> EnsembleSummary:
    """Terminal Z_N and running extremes of Z_n/sigma_n (over n > m) for each replica.

    Replica k uses stream (seed, k) and the same draws sample_path would use.
    """
    replica_ids = np.asarray(list(replica_ids), dtype=np.int64)
    p = schedule(spec, n_max)
    sig = sigma_series(spec, n_max)
    finals = np.empty(replica_ids.size, dtype=np.int64)
    highs = np.full(replica_ids.size, -np.inf)
    lows = np.full(replica_ids.size, np.inf)
    for k, replica in enumerate(replica_ids):
        generator = RngStreamSpec(seed, int(replica)).generator()
        z = spec.z0
        for lo in range(0, n_max, chunk):
            hi = min(lo + chunk, n_max)
            path = z + np.cumsum(_increments(generator.random(hi - lo), p[lo:hi]))
            index = np.arange(lo + 1, hi + 1)
            live = (index > spec.m) & (sig[index] > 0)
            if live.any():
                scaled = path[live] / sig[index[live]]
                highs[k] = max(highs[k], scaled.max())
                lows[k] = min(lows[k], scaled.min())
            z = int(path[-1])
        finals[k] = z
    return EnsembleSummary(replica_ids, finals, highs, lows)


def ks_distance(spec: CouplingSpec, n: int, finals: np.ndarray) -> float:
    """KS distance between (Z_n - E[Z_n]) / sigma_n over the given finals and the standard normal."""
    scale = sigma(spec, n)
    if scale == 0:
        raise DomainError(f"sigma_n vanishes at n={n}; Z_n is deterministic up to step m={spec.m}")
    centred = (np.asarray(finals) - expected_position(spec, n)) / scale
    return float(stats.kstest(centred, stats.norm.cdf).statistic)


def clt_diagnostic(spec: CouplingSpec, n: int, replicas: int, rng: RngStreamSpec) -> float:
    """KS distance of the normalised Z_n from the standard normal over fresh replicas.

    Replica r draws from stream (rng.seed, rng.stream_id + r).
    """
    if replicas < MIN_CLT_REPLICAS:
        raise DomainError(f"the diagnostic needs at least {MIN_CLT_REPLICAS} replicas, got {replicas}")
    ids = range(rng.stream_id, rng.stream_id + replicas)
    return ks_distance(spec, n, sample_ensemble(spec, n, rng.seed, ids).final)


def excursion_fraction(running_extreme: np.ndarray, c: float, upper: bool = True) -> float:
    """Fraction of paths whose running max reached c (or running min reached -c)."""
    running_extreme = np.asarray(running_extreme)
    hit = running_extreme >= c if upper else running_extreme <= -c
    return float(hit.mean())


def synthetic_trace(steps: int, rng: RngStreamSpec, probability: float = 0.5, start: int = 0) -> WalkTrace:
    """A walk trace whose right-step probability is the constant ``probability``."""
    u = rng.generator().random(steps)
    p = np.full(steps, probability)
    positions = start + np.concatenate([[0], np.cumsum(_increments(u, p))])
    return WalkTrace(0, 0, start, u, p, positions)


def domination_check(trace: WalkTrace, spec: CouplingSpec) -> bool:
    """True iff S_n >= Z_n at every recorded step whenever p_n <= P_n held for all n > m.

    Z starts at the walk's step-0 position; over the prescribed history
    (n < first_step <= m) it is forced down one unit per step.
    """
    if spec.direction is not Direction.LOWER:
        raise DomainError("domination from below uses the lower schedule")
    first = trace.first_step
    if spec.m < first:
        raise DomainError(f"m={spec.m} must cover the prescribed history n0={first}")
    count = trace.uniforms.size
    index = np.arange(first, first + count)
    p = schedule(spec, first + count)[first : first + count]
    late = index > spec.m
    if np.any(p[late] > trace.probabilities[late]):
        return True
    z_first = trace.start_position - first
    z = z_first + np.concatenate([[0], np.cumsum(_increments(trace.uniforms, p))])
    violations = int(np.sum(trace.positions < z))
    if violations:
        logger.error("domination violated at %d steps", violations)
    return violations == 0


def envelope_fraction(trace: WalkTrace, b: float, m: int) -> float:
    """Fraction of recorded steps n > m with |P_n - 1/2| <= b / sqrt(n)."""
    index = np.arange(trace.first_step, trace.first_step + trace.probabilities.size)
    late = index > m
    if not late.any():
        return 1.0
    inside = np.abs(trace.probabilities[late] - 0.5) <= b / np.sqrt(index[late])
    return float(inside.mean())
