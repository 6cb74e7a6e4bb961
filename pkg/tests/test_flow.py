import numpy as np
import pytest

from analysis.equilibria import solve_equilibria
from analysis.flow import (
    attraction_rate,
    boundary_inward_check,
    flow_paths,
    integrate,
    stays_in_domain,
    variational_area,
)
from tests.conftest import CENSUS_BETAS
from walks import CertificationError, DomainError, OccupationState, RepulsionParams

RATE_START = OccupationState(0.6, 0.4, 0.45, 0.55)


def test_random_starts_converge_to_center_for_beta_one(rng):
    params = RepulsionParams(1.0)
    starts = rng.uniform(0.0, 1.0, size=(20, 2))
    times, paths = flow_paths(starts, params, 40.0)
    assert times[-1] == pytest.approx(40.0)
    distance = 2.0 * np.abs(paths[-1] - 0.5).sum(axis=1)
    assert np.all(distance < 1e-6)


def test_integrate_certifies_with_step_halving(rng):
    params = RepulsionParams(1.0)
    for u, v in rng.uniform(0.0, 1.0, size=(3, 2)):
        trajectory = integrate(OccupationState.from_planar(u, v), params, 40.0)
        assert trajectory.halving_gap <= 1e-8
        assert trajectory.final.l1_distance(OccupationState.center()) < 1e-6
        lifted = trajectory.lifted()
        assert np.all(lifted[:, 0] + lifted[:, 1] == 1.0)


def test_integrate_rejects_points_off_the_simplex():
    with pytest.raises(DomainError):
        integrate(OccupationState(0.7, 0.7, 0.5, 0.5), RepulsionParams(1.0), 1.0)


def test_step_size_is_capped():
    with pytest.raises(DomainError):
        flow_paths(np.array([[0.2, 0.3]]), RepulsionParams(1.0), 1.0, dt=0.05)


@pytest.mark.parametrize("beta", [0.0, 1.0, 8.0])
def test_field_points_inward_on_the_boundary(beta):
    assert boundary_inward_check(RepulsionParams(beta), 1000)


def test_square_is_positively_invariant(rng):
    starts = np.vstack([rng.uniform(0.0, 1.0, size=(30, 2)), [[0.0, 0.0], [1.0, 1.0], [0.0, 1.0]]])
    _, paths = flow_paths(starts, RepulsionParams(8.0), 10.0)
    assert stays_in_domain(paths)


@pytest.mark.slow
@pytest.mark.parametrize("beta", [0.0, 1.0, 3.0, 8.0])
def test_square_is_positively_invariant_for_long_runs(rng, beta):
    starts = rng.uniform(0.0, 1.0, size=(1000, 2))
    _, paths = flow_paths(starts, RepulsionParams(beta), 100.0)
    assert stays_in_domain(paths)


@pytest.mark.parametrize("beta", CENSUS_BETAS)
def test_reported_equilibria_are_fixed_by_the_flow(beta):
    params = RepulsionParams(beta)
    for equilibrium in solve_equilibria(params).equilibria:
        trajectory = integrate(equilibrium.point, params, 10.0)
        assert trajectory.final.l1_distance(equilibrium.point) < 1e-8


def test_paths_near_the_asymmetric_equilibrium_stay_close():
    params = RepulsionParams(3.0)
    u, v = solve_equilibria(params).equilibria[1].point.planar
    _, paths = flow_paths(np.array([[u + 1e-7, v - 1e-7]]), params, 40.0)
    distance = 2.0 * np.abs(paths[:, 0, :] - [u, v]).sum(axis=1)
    assert distance.max() < 1e-6
    assert distance[-1] < distance[0]


@pytest.mark.parametrize("beta", [0.0, 0.5, 1.0, 1.5, 1.9])
def test_attraction_rate_is_one_minus_half_beta(beta):
    rate = attraction_rate(RepulsionParams(beta), RATE_START, 40.0)
    assert rate == pytest.approx(1.0 - beta / 2.0, abs=0.05)


def test_attraction_rate_needs_subcritical_beta():
    with pytest.raises(DomainError):
        attraction_rate(RepulsionParams(2.5), RATE_START, 10.0)


def test_supercritical_flow_leaves_the_center():
    trajectory = integrate(OccupationState.from_planar(0.49, 0.51), RepulsionParams(4.0), 30.0)
    final = trajectory.final.as_array()
    assert np.abs(final - 0.5).sum() > 1.5


def test_variational_determinant_is_exp_minus_two_t():
    dets = variational_area(OccupationState.from_planar(0.2, 0.9), RepulsionParams(3.0), 2.0)
    times = np.linspace(0.0, 2.0, dets.size)
    assert dets == pytest.approx(np.exp(-2.0 * times), rel=1e-6)


def test_certification_failure_is_reported(monkeypatch):
    import analysis.flow as flow

    monkeypatch.setattr(flow, "HALVING_TOL", -1.0)
    with pytest.raises(CertificationError):
        flow.integrate(OccupationState.from_planar(0.3, 0.6), RepulsionParams(1.0), 1.0)
