import math

import numpy as np
import pytest

from analysis.equilibria import (
    asymmetric_w,
    bisect,
    critical_w,
    fixed_point_gap,
    g,
    grid_scan_root,
    solve_equilibria,
)
from analysis.field import Stability, field_array
from tests.conftest import CENSUS_BETAS, SUPERCRITICAL_BETAS
from walks import DomainError, RepulsionParams


@pytest.mark.parametrize("beta", CENSUS_BETAS)
def test_equilibrium_census(beta):
    report = solve_equilibria(RepulsionParams(beta))
    assert report.count == (3 if beta > 2 else 1)
    for equilibrium in report.equilibria:
        assert np.abs(field_array(equilibrium.point.as_array(), beta)).sum() < 1e-10
        assert equilibrium.point.in_domain()


def test_beta_three_root_matches_grid_scan():
    params = RepulsionParams(3.0)
    w = asymmetric_w(params)
    assert w == pytest.approx(0.070466, abs=1e-5)
    assert abs(grid_scan_root(params) - w) < 2e-6


def test_beta_four_root():
    assert asymmetric_w(RepulsionParams(4.0)) == pytest.approx(0.0212, abs=2e-4)


def test_fixed_point_relation_holds():
    params = RepulsionParams(5.0)
    w = asymmetric_w(params)
    assert g(1 - w, params) == pytest.approx(w, abs=1e-14)
    assert fixed_point_gap(0.5, 5.0) == pytest.approx(0.0, abs=1e-15)


def test_no_asymmetric_root_at_or_below_two():
    with pytest.raises(DomainError):
        asymmetric_w(RepulsionParams(2.0))
    with pytest.raises(DomainError):
        critical_w(RepulsionParams(1.0))


@pytest.mark.parametrize("beta", SUPERCRITICAL_BETAS)
def test_root_lies_below_critical_w(beta):
    params = RepulsionParams(beta)
    w_star = critical_w(params)
    assert w_star == pytest.approx((beta - math.acosh(beta - 1)) / (2 * beta))
    assert asymmetric_w(params) < w_star


def test_critical_w_at_three():
    assert critical_w(RepulsionParams(3.0)) == pytest.approx(0.2805, abs=1e-4)


def test_bisection_on_a_known_bracket():
    root = bisect(lambda x: 2.0 - x * x, 0.0, 2.0)
    assert root == pytest.approx(math.sqrt(2.0), abs=1e-15)


def test_stability_labels():
    below = solve_equilibria(RepulsionParams(1.0))
    assert below.center.spectrum.stability is Stability.STABLE
    above = solve_equilibria(RepulsionParams(3.0))
    assert above.center.spectrum.stability is Stability.UNSTABLE
    assert all(e.spectrum.stability is Stability.STABLE for e in above.equilibria[1:])
    assert solve_equilibria(RepulsionParams(2.0)).non_hyperbolic


def test_asymmetric_pair_is_mirrored():
    report = solve_equilibria(RepulsionParams(4.0))
    first, second = report.equilibria[1].point.as_array(), report.equilibria[2].point.as_array()
    assert np.allclose(first, second[[1, 0, 3, 2]], atol=1e-15)


def test_nearest_classifies_points():
    report = solve_equilibria(RepulsionParams(4.0))
    w = report.equilibria[1].w
    points = np.array([[0.5, 0.5, 0.5, 0.5], [w + 0.01, 0.99 - w, 1 - w, w], [0.97, 0.03, 0.02, 0.98]])
    index, distance = report.nearest(points)
    assert index.tolist() == [0, 1, 2]
    assert distance[0] == 0.0
    assert distance[1] == pytest.approx(0.02)


def test_report_serialises():
    rows = solve_equilibria(RepulsionParams(3.0)).to_dicts()
    assert [row["kind"] for row in rows] == ["center", "asymmetric", "asymmetric-mirror"]
    assert rows[0]["stability"] == "linearly-unstable"
    assert len(rows[1]["eigenvalues"]) == 4
