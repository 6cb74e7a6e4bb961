"""The joint repelling-walk process on the integers.

Each walk steps right with probability ``psi(y)`` where ``y`` is the other
walk's net displacement per step so far and ``psi(y) = 1 / (1 + exp(beta * y))``.
Histories are kept as integer transition counts ``(l1, r1, l2, r2)``; the
occupation proportions X(n) are derived from them on demand, never
accumulated in floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.special import expit

from walks.errors import DomainError

# Index layout shared by count vectors, occupation vectors and tangent vectors.
L1, R1, L2, R2 = 0, 1, 2, 3


@dataclass(frozen=True)
class RepulsionParams:
    beta: float

    def __post_init__(self):
        if not math.isfinite(self.beta) or self.beta < 0:
            raise DomainError(f"beta must be a finite nonnegative real, got {self.beta}")


@dataclass(frozen=True)
class InitialHistory:
    counts: Tuple[int, int, int, int] = (0, 1, 0, 1)
    start_positions: Tuple[int, int] = (0, 0)

    def __post_init__(self):
        if len(self.counts) != 4 or any(int(c) != c or c < 0 for c in self.counts):
            raise DomainError(f"history counts must be four nonnegative integers, got {self.counts}")
        if len(self.start_positions) != 2:
            raise DomainError(f"start positions must be a pair, got {self.start_positions}")
        l1, r1, l2, r2 = self.counts
        if l1 + r1 != l2 + r2:
            raise DomainError(f"both walks need the same history length, got {l1 + r1} and {l2 + r2}")
        if l1 + r1 < 1:
            raise DomainError("history length n0 must be at least 1")

    @property
    def n0(self) -> int:
        return self.counts[L1] + self.counts[R1]


@dataclass(frozen=True)
class OccupationState:
    """A point (x1l, x1r, x2l, x2r) of the product of two 1-simplices."""

    x1l: float
    x1r: float
    x2l: float
    x2r: float

    @classmethod
    def from_array(cls, values) -> "OccupationState":
        a, b, c, d = (float(v) for v in values)
        return cls(a, b, c, d)

    @classmethod
    def from_planar(cls, u: float, v: float) -> "OccupationState":
        """Lift planar coordinates (x1l, x2l) back to the four coordinates."""
        return cls(float(u), 1.0 - float(u), float(v), 1.0 - float(v))

    @classmethod
    def center(cls) -> "OccupationState":
        return cls(0.5, 0.5, 0.5, 0.5)

    def as_array(self) -> np.ndarray:
        return np.array([self.x1l, self.x1r, self.x2l, self.x2r], dtype=float)

    @property
    def planar(self) -> Tuple[float, float]:
        return self.x1l, self.x2l

    def in_domain(self, tol: float = 1e-12) -> bool:
        """True iff both rows lie in the simplex to within ``tol``."""
        x = self.as_array()
        return bool(
            np.all(x >= -tol)
            and np.all(x <= 1 + tol)
            and abs(x[L1] + x[R1] - 1) <= tol
            and abs(x[L2] + x[R2] - 1) <= tol
        )

    def l1_distance(self, other: "OccupationState") -> float:
        """L1 distance over all four coordinates."""
        return float(np.abs(self.as_array() - other.as_array()).sum())


@dataclass(frozen=True)
class TangentVector:
    """A vector (t1l, t1r, t2l, t2r) with zero sum inside each walk's pair."""

    t1l: float
    t1r: float
    t2l: float
    t2r: float

    @classmethod
    def from_array(cls, values) -> "TangentVector":
        a, b, c, d = (float(v) for v in values)
        return cls(a, b, c, d)

    def as_array(self) -> np.ndarray:
        return np.array([self.t1l, self.t1r, self.t2l, self.t2r], dtype=float)

    def is_tangent(self, tol: float = 1e-12) -> bool:
        """True iff each walk's pair sums to zero."""
        return abs(self.t1l + self.t1r) <= tol and abs(self.t2l + self.t2r) <= tol

    @property
    def l1_norm(self) -> float:
        return float(np.abs(self.as_array()).sum())


@dataclass(frozen=True)
class WalkPairState:
    n: int
    positions: Tuple[int, int]
    counts: Tuple[int, int, int, int]
    start_positions: Tuple[int, int] = (0, 0)

    def __post_init__(self):
        l1, r1, l2, r2 = self.counts
        if min(self.counts) < 0:
            raise DomainError(f"counts must be nonnegative, got {self.counts}")
        if l1 + r1 != self.n or l2 + r2 != self.n:
            raise DomainError(f"counts {self.counts} do not add up to n={self.n} for each walk")
        s1, s2 = self.start_positions
        if self.positions != (s1 + r1 - l1, s2 + r2 - l2):
            raise DomainError(
                f"positions {self.positions} disagree with counts {self.counts} from {self.start_positions}"
            )


def initial_state(history: InitialHistory) -> WalkPairState:
    """State at n0 built from the prescribed history."""
    l1, r1, l2, r2 = history.counts
    s1, s2 = history.start_positions
    return WalkPairState(
        n=history.n0,
        positions=(s1 + r1 - l1, s2 + r2 - l2),
        counts=tuple(int(c) for c in history.counts),
        start_positions=tuple(history.start_positions),
    )


def psi(y: float, params: RepulsionParams) -> float:
    """Right-step law: 1 / (1 + exp(beta * y)) for y in [-1, 1]."""
    if not -1.0 <= y <= 1.0:
        raise DomainError(f"psi is defined on [-1, 1], got y={y}")
    return float(expit(-params.beta * y))


# Array kernels. They accept any leading shape and are shared by the scalar
# operations below and by the replica ensemble.


def occupation_array(counts: np.ndarray, n) -> np.ndarray:
    """Counts (..., 4) over n steps -> proportions (..., 4) with exact row sums.

    The smaller share of each walk is a single division; the larger one is its
    complement, which keeps both row sums exactly 1 in floating point.
    """
    counts = np.asarray(counts)
    out = np.empty(counts.shape, dtype=float)
    for lo, hi in ((L1, R1), (L2, R2)):
        left, right = counts[..., lo], counts[..., hi]
        left_minor = left <= right
        minor = np.where(left_minor, left, right) / n
        major = 1.0 - minor
        out[..., lo] = np.where(left_minor, minor, major)
        out[..., hi] = np.where(left_minor, major, minor)
    return out


def _ratio_pair(x_left: np.ndarray, x_right: np.ndarray, beta: float):
    """(e^{-b xl}, e^{-b xr}) normalised, with the larger exponent subtracted first."""
    a_left = -beta * x_left
    a_right = -beta * x_right
    top = np.maximum(a_left, a_right)
    w_left = np.exp(a_left - top)
    w_right = np.exp(a_right - top)
    total = w_left + w_right
    left_minor = w_left <= w_right
    minor = np.where(left_minor, w_left, w_right) / total
    major = 1.0 - minor
    return np.where(left_minor, minor, major), np.where(left_minor, major, minor)


def pi_array(x: np.ndarray, beta: float) -> np.ndarray:
    """Transition-probability map on (..., 4) occupation arrays (exponential-ratio form)."""
    x = np.asarray(x, dtype=float)
    out = np.empty(x.shape, dtype=float)
    out[..., L1], out[..., R1] = _ratio_pair(x[..., L2], x[..., R2], beta)
    out[..., L2], out[..., R2] = _ratio_pair(x[..., L1], x[..., R1], beta)
    return out


def pi_array_psi_form(x: np.ndarray, beta: float) -> np.ndarray:
    """Same map written as psi(2 x^j_v - 1); kept for cross-checking pi_array."""
    x = np.asarray(x, dtype=float)
    other = x[..., [L2, R2, L1, R1]]
    return expit(-beta * (2.0 * other - 1.0))


def right_probabilities(counts: np.ndarray, n, beta: float) -> np.ndarray:
    """Probabilities (..., 2) that walk 1 and walk 2 step right next."""
    pi = pi_array(occupation_array(counts, n), beta)
    return pi[..., [R1, R2]]


def pi_map(x: OccupationState, params: RepulsionParams) -> OccupationState:
    """Transition-probability map pi on a single occupation state."""
    return OccupationState.from_array(pi_array(x.as_array(), params.beta))


def occupation(state: WalkPairState) -> OccupationState:
    """Occupation proportions X(n) = counts / n."""
    if state.n < 1:
        raise DomainError("occupation proportions need n >= 1")
    return OccupationState.from_array(occupation_array(np.array(state.counts), state.n))


def step(state: WalkPairState, params: RepulsionParams, draws) -> WalkPairState:
    """Advance both walks one step; walk i steps right iff draws[i] < pi^i_r(X(n))."""
    u1, u2 = draws
    p1, p2 = right_probabilities(np.array(state.counts), state.n, params.beta)
    l1, r1, l2, r2 = state.counts
    s1, s2 = state.positions
    if u1 < p1:
        r1, s1 = r1 + 1, s1 + 1
    else:
        l1, s1 = l1 + 1, s1 - 1
    if u2 < p2:
        r2, s2 = r2 + 1, s2 + 1
    else:
        l2, s2 = l2 + 1, s2 - 1
    return WalkPairState(
        n=state.n + 1,
        positions=(s1, s2),
        counts=(l1, r1, l2, r2),
        start_positions=state.start_positions,
    )


def transition_indicator(state_before: WalkPairState, state_after: WalkPairState) -> np.ndarray:
    """xi(n): one-hot left/right indicators of the step taken by each walk."""
    if state_after.n != state_before.n + 1 or state_after.start_positions != state_before.start_positions:
        raise DomainError("state_after is not the successor of state_before")
    xi = np.array(state_after.counts) - np.array(state_before.counts)
    if sorted(xi.tolist()) != [0, 0, 1, 1] or xi[L1] + xi[R1] != 1:
        raise DomainError("state_after is not the successor of state_before")
    return xi.astype(float)


def noise_realization(
    state_before: WalkPairState, state_after: WalkPairState, params: RepulsionParams
) -> TangentVector:
    """U_n = xi(n) - pi(X(n)), the martingale-difference term of the recursion."""
    xi = transition_indicator(state_before, state_after)
    pi = pi_array(occupation(state_before).as_array(), params.beta)
    return TangentVector.from_array(xi - pi)


def interpolated_times(n) -> np.ndarray:
    """ODE time tau_n = sum_{k<=n} 1/k reached by the recursion after n steps."""
    n = np.atleast_1d(np.asarray(n, dtype=np.int64))
    if n.size and n.min() < 0:
        raise DomainError("step indices must be nonnegative")
    top = int(n.max()) if n.size else 0
    tau = np.concatenate([[0.0], np.cumsum(1.0 / np.arange(1, top + 1))])
    return tau[n]
