"""The mean-field vector field F(x) = -x + pi(x) and its linearisation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Tuple

import numpy as np

from walks.errors import DomainError
from walks.process import L1, L2, R1, R2, OccupationState, RepulsionParams, TangentVector, pi_array

EIGEN_TOL = 1e-9
FD_STEP = 1e-6


class Stability(str, Enum):
    STABLE = "linearly-stable"
    UNSTABLE = "linearly-unstable"
    NON_HYPERBOLIC = "non-hyperbolic"


@dataclass(frozen=True)
class FieldValue(TangentVector):
    """F evaluated at a point; lies in the tangent space because pi preserves the simplex."""


@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: Tuple[complex, ...]
    stability: Stability

    def to_dict(self) -> dict:
        return {
            "eigenvalues": [[float(z.real), float(z.imag)] for z in self.eigenvalues],
            "stability": self.stability.value,
        }


class ExcitationCheck(NamedTuple):
    q: float
    s: float
    ok: bool


def field_array(x: np.ndarray, beta: float) -> np.ndarray:
    """F(x) = -x + pi(x) on (..., 4) arrays."""
    x = np.asarray(x, dtype=float)
    return -x + pi_array(x, beta)


def field(x: OccupationState, params: RepulsionParams) -> FieldValue:
    """F at a single occupation state."""
    return FieldValue.from_array(field_array(x.as_array(), params.beta))


def planar_field(uv: np.ndarray, beta: float) -> np.ndarray:
    """F restricted to the unit square: (F1l, F2l) at planar points (..., 2)."""
    uv = np.asarray(uv, dtype=float)
    u, v = uv[..., 0], uv[..., 1]
    x = np.stack([u, 1.0 - u, v, 1.0 - v], axis=-1)
    return field_array(x, beta)[..., [L1, L2]]


def jacobian(x: OccupationState, params: RepulsionParams) -> np.ndarray:
    """Analytic 4x4 Jacobian of F with pi in exponential-ratio form."""
    pi = pi_array(x.as_array(), params.beta)
    c1 = params.beta * pi[L1] * pi[R1]
    c2 = params.beta * pi[L2] * pi[R2]
    jac = -np.eye(4)
    jac[L1, L2], jac[L1, R2] = -c1, c1
    jac[R1, L2], jac[R1, R2] = c1, -c1
    jac[L2, L1], jac[L2, R1] = -c2, c2
    jac[R2, L1], jac[R2, R1] = c2, -c2
    return jac


def numeric_jacobian(x: OccupationState, params: RepulsionParams, step: float = FD_STEP) -> np.ndarray:
    """Central-difference Jacobian of F, for checking ``jacobian``."""
    base = x.as_array()
    jac = np.empty((4, 4))
    for k in range(4):
        e = np.zeros(4)
        e[k] = step
        jac[:, k] = (field_array(base + e, params.beta) - field_array(base - e, params.beta)) / (2 * step)
    return jac


def planar_jacobian(u: float, v: float, params: RepulsionParams) -> np.ndarray:
    """Jacobian of the planar field at (x1l, x2l)."""
    x = pi_array(np.array([u, 1.0 - u, v, 1.0 - v]), params.beta)
    # d/dv psi(2v - 1) = -2 beta psi (1 - psi)
    return np.array(
        [
            [-1.0, -2.0 * params.beta * x[L1] * x[R1]],
            [-2.0 * params.beta * x[L2] * x[R2], -1.0],
        ]
    )


def classify(eigenvalues, tol: float = EIGEN_TOL) -> Stability:
    """Stability label from the real parts of the eigenvalues."""
    real = np.real(np.asarray(eigenvalues, dtype=complex))
    if np.any(np.abs(real) <= tol):
        return Stability.NON_HYPERBOLIC
    if np.all(real < 0):
        return Stability.STABLE
    return Stability.UNSTABLE


def spectrum(matrix: np.ndarray) -> SpectrumReport:
    """Spectrum of an arbitrary Jacobian by a dense eigensolver, sorted by real part."""
    values = np.linalg.eigvals(matrix)
    values = sorted((complex(z) for z in values), key=lambda z: (z.real, z.imag))
    return SpectrumReport(tuple(values), classify(values))


def h_coefficient(w: float, beta: float) -> float:
    """h(w, beta) = beta / (2 + 2 cosh(beta - 2 beta w))."""
    return beta / (2.0 + 2.0 * math.cosh(beta - 2.0 * w * beta))


def spectrum_at_center(params: RepulsionParams) -> SpectrumReport:
    """Closed-form spectrum {-1, -1, -1 -/+ beta/2} at x*."""
    half = params.beta / 2.0
    values = sorted([-1.0, -1.0, -1.0 - half, -1.0 + half])
    eigenvalues = tuple(complex(v) for v in values)
    return SpectrumReport(eigenvalues, classify(eigenvalues))


def spectrum_at_asymmetric(w: float, params: RepulsionParams) -> SpectrumReport:
    """Closed-form spectrum {-1, -1, -1 -/+ 2h} at (w, 1-w, 1-w, w)."""
    if params.beta <= 2:
        raise DomainError(f"asymmetric equilibria exist only for beta > 2, got {params.beta}")
    if not 0 < w < 0.5:
        raise DomainError(f"w must lie in (0, 1/2), got {w}")
    h = h_coefficient(w, params.beta)
    values = sorted([-1.0, -1.0, -1.0 - 2.0 * h, -1.0 + 2.0 * h])
    eigenvalues = tuple(complex(v) for v in values)
    return SpectrumReport(eigenvalues, classify(eigenvalues))


def divergence(x: OccupationState, params: RepulsionParams) -> float:
    """Trace of the planar Jacobian at (x1l, x2l); identically -2."""
    return float(np.trace(planar_jacobian(x.x1l, x.x2l, params)))


def numeric_divergence(x: OccupationState, params: RepulsionParams, step: float = FD_STEP) -> float:
    """Central-difference divergence of the planar field."""
    u, v = x.planar
    du = (planar_field([u + step, v], params.beta)[0] - planar_field([u - step, v], params.beta)[0]) / (2 * step)
    dv = (planar_field([u, v + step], params.beta)[1] - planar_field([u, v - step], params.beta)[1]) / (2 * step)
    return float(du + dv)


# The four joint outcomes of one step: which coordinate of xi^1 and xi^2 is 1.
_OUTCOMES = np.array(
    [
        [1.0, 0.0, 1.0, 0.0],
        [1.0, 0.0, 0.0, 1.0],
        [0.0, 1.0, 1.0, 0.0],
        [0.0, 1.0, 0.0, 1.0],
    ]
)


def excitation_bound(x: np.ndarray, beta: float) -> float:
    """s(x) = (min pi)^3 / 2."""
    return 0.5 * float(np.min(pi_array(x, beta))) ** 3


def expected_positive_part(x: np.ndarray, thetas: np.ndarray, beta: float) -> np.ndarray:
    """E[<theta, U_n>^+ | X(n) = x] for each row of ``thetas``, by exact enumeration."""
    pi = pi_array(np.asarray(x, dtype=float), beta)
    probabilities = np.array(
        [pi[L1] * pi[L2], pi[L1] * pi[R2], pi[R1] * pi[L2], pi[R1] * pi[R2]]
    )
    noise = _OUTCOMES - pi  # (4 outcomes, 4 coords)
    inner = np.atleast_2d(thetas) @ noise.T  # (k, 4 outcomes)
    return np.maximum(inner, 0.0) @ probabilities


def excitation_bound_check(
    x: OccupationState, theta: TangentVector, params: RepulsionParams, tol: float = 1e-9
) -> ExcitationCheck:
    """Compare E[<theta, U_n>^+] at x with the lower bound s(x)."""
    if not theta.is_tangent(tol):
        raise DomainError(f"theta must be tangent (zero sum per walk), got {theta}")
    if abs(theta.l1_norm - 1.0) > tol:
        raise DomainError(f"theta must have unit L1 norm, got {theta.l1_norm}")
    point = x.as_array()
    q = float(expected_positive_part(point, theta.as_array(), params.beta)[0])
    s = excitation_bound(point, params.beta)
    return ExcitationCheck(q, s, q >= s)
