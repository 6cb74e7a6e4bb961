"""Zeros of F and their classification.

Every equilibrium has the form (w, 1-w, 1-w, w) with w = g(1-w). The center
w = 1/2 always qualifies; for beta > 2 there is exactly one more root in
(0, 1/2), and its mirror (1-w, w, w, 1-w).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field as dataclass_field
from typing import List

import numpy as np
from scipy.special import expit

from analysis.field import SpectrumReport, Stability, spectrum_at_asymmetric, spectrum_at_center
from walks.errors import CertificationError, DomainError
from walks.process import OccupationState, RepulsionParams

logger = logging.getLogger(__name__)

BISECTION_ITERATIONS = 64
ENDPOINT_GUARD = 1e-9
CRITICAL_BETA = 2.0


@dataclass(frozen=True)
class Equilibrium:
    point: OccupationState
    w: float
    spectrum: SpectrumReport
    kind: str

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "w": self.w,
            "point": list(self.point.as_array().tolist()),
            **self.spectrum.to_dict(),
        }


@dataclass(frozen=True)
class EquilibriumReport:
    beta: float
    equilibria: List[Equilibrium] = dataclass_field(default_factory=list)
    non_hyperbolic: bool = False

    @property
    def count(self) -> int:
        return len(self.equilibria)

    @property
    def center(self) -> Equilibrium:
        return self.equilibria[0]

    def points(self) -> np.ndarray:
        return np.array([e.point.as_array() for e in self.equilibria])

    def nearest(self, x: np.ndarray):
        """Index of and L1 distance to the nearest listed equilibrium, for (..., 4) points."""
        x = np.asarray(x, dtype=float)
        distances = np.abs(x[..., None, :] - self.points()).sum(axis=-1)
        return np.argmin(distances, axis=-1), np.min(distances, axis=-1)

    def to_dicts(self) -> list:
        return [e.to_dict() for e in self.equilibria]


def g(w: float, params: RepulsionParams) -> float:
    """g(w) = 1 / (1 + exp(beta (2w - 1))); equilibria solve w = g(1 - w)."""
    if not 0.0 <= w <= 1.0:
        raise DomainError(f"g is defined on [0, 1], got w={w}")
    return float(expit(params.beta - 2.0 * params.beta * w))


def fixed_point_gap(w, beta: float):
    """H(w) = g(1 - w) - w; vectorised over ``w``."""
    w = np.asarray(w, dtype=float)
    return expit(-beta * (1.0 - 2.0 * w)) - w


def bisect(fn, lo: float, hi: float, iterations: int = BISECTION_ITERATIONS) -> float:
    """Bisection on a bracket with fn(lo) > 0 > fn(hi)."""
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if fn(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def asymmetric_w(params: RepulsionParams) -> float:
    """The root of g(1 - w) = w in (0, 1/2), by bisection."""
    beta = params.beta
    if beta <= CRITICAL_BETA:
        raise DomainError(f"no asymmetric equilibrium for beta <= 2, got {beta}")
    lo, hi = 0.0, 0.5 - ENDPOINT_GUARD
    if not (fixed_point_gap(lo, beta) > 0 > fixed_point_gap(hi, beta)):
        raise DomainError(f"no sign change of g(1-w) - w on [0, 1/2) for beta={beta}")
    return bisect(lambda w: float(fixed_point_gap(w, beta)), lo, hi)


def grid_scan_root(params: RepulsionParams, points: int = 10**6) -> float:
    """Brute-force bracket of the asymmetric root on a uniform grid of [0, 1/2)."""
    grid = np.linspace(0.0, 0.5 - ENDPOINT_GUARD, points)
    gap = fixed_point_gap(grid, params.beta)
    crossings = np.flatnonzero((gap[:-1] > 0) & (gap[1:] <= 0))
    if crossings.size == 0:
        raise DomainError(f"grid scan found no root for beta={params.beta}")
    k = crossings[0]
    return float(0.5 * (grid[k] + grid[k + 1]))


def solve_equilibria(params: RepulsionParams) -> EquilibriumReport:
    """All zeros of F with their spectra, center first."""
    center = Equilibrium(OccupationState.center(), 0.5, spectrum_at_center(params), "center")
    equilibria = [center]
    if params.beta > CRITICAL_BETA:
        w = asymmetric_w(params)
        spectrum = spectrum_at_asymmetric(w, params)
        equilibria.append(Equilibrium(OccupationState(w, 1 - w, 1 - w, w), w, spectrum, "asymmetric"))
        equilibria.append(Equilibrium(OccupationState(1 - w, w, w, 1 - w), w, spectrum, "asymmetric-mirror"))
    non_hyperbolic = center.spectrum.stability is Stability.NON_HYPERBOLIC
    if non_hyperbolic:
        logger.warning("beta=%s: the center is non-hyperbolic", params.beta)
    return EquilibriumReport(params.beta, equilibria, non_hyperbolic)


def critical_w(params: RepulsionParams) -> float:
    """w* = (beta - arcosh(beta - 1)) / (2 beta), where -1 + 2h(w*, beta) = 0."""
    beta = params.beta
    if beta <= CRITICAL_BETA:
        raise DomainError(f"critical_w needs beta > 2, got {beta}")
    w_star = (beta - math.acosh(beta - 1.0)) / (2.0 * beta)
    w = asymmetric_w(params)
    if not w < w_star:
        raise CertificationError(f"beta={beta}: asymmetric root w={w} is not below w*={w_star}")
    return w_star
