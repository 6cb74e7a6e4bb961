"""Integration of the mean ODE dx/dt = F(x) on the planar reduction.

Trajectories are integrated in (x1l, x2l) with a fixed-step classical
Runge-Kutta scheme and lifted back to four coordinates at the end, so the
simplex constraints hold exactly along every path.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List

import numpy as np

from analysis.field import planar_field, planar_jacobian
from walks.errors import CertificationError, DomainError
from walks.process import OccupationState, RepulsionParams, psi

logger = logging.getLogger(__name__)

MAX_DT = 0.01
HALVING_TOL = 1e-8
DOMAIN_TOL = 1e-9
CENTER = np.array([0.5, 0.5])


@dataclass(frozen=True)
class FlowTrajectory:
    times: np.ndarray
    planar: np.ndarray
    params: RepulsionParams
    dt: float
    halving_gap: float = 0.0

    @property
    def points(self) -> List[OccupationState]:
        return [OccupationState.from_planar(u, v) for u, v in self.planar]

    @property
    def final(self) -> OccupationState:
        return OccupationState.from_planar(*self.planar[-1])

    def lifted(self) -> np.ndarray:
        """Planar samples lifted to (x1l, x1r, x2l, x2r) rows."""
        u, v = self.planar[:, 0], self.planar[:, 1]
        return np.stack([u, 1.0 - u, v, 1.0 - v], axis=-1)


def rk4_step(uv: np.ndarray, beta: float, dt: float) -> np.ndarray:
    """One classical Runge-Kutta step of the planar field."""
    k1 = planar_field(uv, beta)
    k2 = planar_field(uv + 0.5 * dt * k1, beta)
    k3 = planar_field(uv + 0.5 * dt * k2, beta)
    k4 = planar_field(uv + dt * k3, beta)
    return uv + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _step_count(t_max: float, dt: float) -> int:
    if not t_max > 0:
        raise DomainError(f"t_max must be positive, got {t_max}")
    if not 0 < dt <= MAX_DT:
        raise DomainError(f"dt must lie in (0, {MAX_DT}], got {dt}")
    return max(1, math.ceil(t_max / dt - 1e-9))


def flow_paths(starts: np.ndarray, params: RepulsionParams, t_max: float, dt: float = MAX_DT):
    """Integrate many planar starts (k, 2) at once.

    Returns ``(times, paths)`` with ``paths`` of shape (steps + 1, k, 2). The
    step is shrunk to t_max / ceil(t_max / dt) so the last sample is t_max.
    """
    steps = _step_count(t_max, dt)
    h = t_max / steps
    uv = np.array(starts, dtype=float)
    paths = np.empty((steps + 1,) + uv.shape)
    paths[0] = uv
    for k in range(steps):
        uv = rk4_step(uv, params.beta, h)
        paths[k + 1] = uv
    return np.linspace(0.0, t_max, steps + 1), paths


def stays_in_domain(paths: np.ndarray, tol: float = DOMAIN_TOL) -> bool:
    """True iff every planar sample lies in the unit square."""
    return bool(np.all(paths >= -tol) and np.all(paths <= 1.0 + tol))


def integrate(x0: OccupationState, params: RepulsionParams, t_max: float, dt: float = MAX_DT) -> FlowTrajectory:
    """Integrate from x0 and certify the end point against a run at half the step."""
    if not x0.in_domain():
        raise DomainError(f"start point {x0} is not in the product of simplices")
    start = np.array(x0.planar)
    times, paths = flow_paths(start, params, t_max, dt)
    _, halved = flow_paths(start, params, t_max, (times[1] - times[0]) / 2.0)
    gap = float(np.abs(paths[-1] - halved[-1]).sum())
    if gap > HALVING_TOL:
        raise CertificationError(
            f"step halving disagrees by {gap:.3e} > {HALVING_TOL:g} at t={t_max} (beta={params.beta}, dt={dt})"
        )
    logger.debug("flow from %s to t=%s certified, halving gap %.2e", x0.planar, t_max, gap)
    return FlowTrajectory(times, paths, params, float(times[1] - times[0]), gap)


def boundary_inward_check(params: RepulsionParams, samples: int) -> bool:
    """Check that F points into the square on all four faces by at least 1/(1+e^beta).

    On the face x1l = 0 the planar derivative of x1l is psi(2 z2l - 1); the
    other faces are the same statement under the symmetries of the law.
    """
    if samples < 1:
        raise DomainError(f"samples must be at least 1, got {samples}")
    bound = 1.0 / (1.0 + math.exp(params.beta))
    along = np.linspace(0.0, 1.0, samples) if samples > 1 else np.array([1.0])
    slack = bound * 1e-12
    ok = True
    for axis in (0, 1):
        for face in (0.0, 1.0):
            points = np.empty((along.size, 2))
            points[:, axis] = face
            points[:, 1 - axis] = along
            velocity = planar_field(points, params.beta)[:, axis]
            inward = velocity if face == 0.0 else -velocity
            expected = np.array([psi(2.0 * z - 1.0, params) for z in along])
            if face == 1.0:
                expected = 1.0 - expected
            ok &= bool(np.all(inward >= bound - slack))
            ok &= bool(np.allclose(inward, expected, rtol=1e-12, atol=1e-15))
    return ok


def attraction_rate(params: RepulsionParams, x0: OccupationState, t_max: float, dt: float = MAX_DT) -> float:
    """Empirical exponential rate of approach to x* over the tail [t_max/2, t_max]."""
    if params.beta >= 2:
        raise DomainError(f"the center attracts only for beta < 2, got {params.beta}")
    trajectory = integrate(x0, params, t_max, dt)
    distance = 2.0 * np.abs(trajectory.planar - CENTER).sum(axis=1)
    if distance[0] == 0:
        raise DomainError("x0 must differ from the center")
    if not distance[-1] < distance[0]:
        raise CertificationError(f"trajectory from {x0.planar} did not approach the center (beta={params.beta})")
    tail = (trajectory.times >= t_max / 2.0) & (distance > 1e-12)
    if tail.sum() < 2:
        raise CertificationError("tail window has no resolvable distances; lower t_max")
    slope, _ = np.polyfit(trajectory.times[tail], np.log(distance[tail]), 1)
    return float(-slope)


def variational_area(x0: OccupationState, params: RepulsionParams, t_max: float, dt: float = MAX_DT) -> np.ndarray:
    """det of the planar variational flow D(phi_t) along the path; equals exp(-2 t)."""
    steps = _step_count(t_max, dt)
    h = t_max / steps
    beta = params.beta

    def rhs(state):
        u, v = state[:2]
        m = state[2:].reshape(2, 2)
        return np.concatenate([planar_field(np.array([u, v]), beta), (planar_jacobian(u, v, params) @ m).ravel()])

    state = np.concatenate([np.array(x0.planar, dtype=float), np.eye(2).ravel()])
    dets = [1.0]
    for _ in range(steps):
        k1 = rhs(state)
        k2 = rhs(state + 0.5 * h * k1)
        k3 = rhs(state + 0.5 * h * k2)
        k4 = rhs(state + h * k3)
        state = state + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        dets.append(float(np.linalg.det(state[2:].reshape(2, 2))))
    return np.array(dets)
