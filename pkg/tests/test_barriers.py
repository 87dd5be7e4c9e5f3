import math

import numpy as np
import pytest

from warpends.barriers import (AuditGrid, BarrierError, CapChart, audit_superharmonic,
                               barrier_2d, build_barrier, cap_chart, cap_eigenfunction,
                               check_conformal_hypotheses, conformal_rescale, positivity_margin,
                               refine_audit, sigma_profile)
from warpends.criteria import SOLVABLE, comparison_warp, radial_comparison
from warpends.geometry import circle, flat_torus, make_end


@pytest.fixture
def rlog2_barrier(rlog2_end):
    comparison = radial_comparison(rlog2_end)
    return barrier_2d(0.0, comparison, np.linspace(2.0, 60.0, 2001))


@pytest.fixture
def torus_barrier(hyperbolic_end):
    chart = cap_chart(flat_torus())
    return build_barrier(chart, radial_comparison(hyperbolic_end), np.linspace(1.0, 8.0, 2001))


def test_cap_eigenvalues():
    eig = cap_eigenfunction(cap_chart(circle()))
    assert eig.lambda1 == pytest.approx(1.0)
    assert eig.A == -1.0

    theta = np.linspace(-1.5, 1.5, 7)
    np.testing.assert_allclose(eig((theta,)), -np.cos(theta))
    assert eig((math.pi,)) == 0.0

    torus = cap_eigenfunction(cap_chart(flat_torus()))
    assert torus.lambda1 == pytest.approx(math.sqrt(2))

    narrow = cap_eigenfunction(cap_chart(flat_torus(), half_widths=(0.5, 1.0)))
    assert narrow.lambda1 == pytest.approx(math.hypot(math.pi, math.pi / 2))


def test_cap_eigenfunction_derivatives():
    eig = cap_eigenfunction(cap_chart(flat_torus(), center=(1.0, 2.0), half_widths=(1.0, 1.5)))
    rng = np.random.default_rng(6)
    u = 1.0 + rng.uniform(-0.9, 0.9, 40)
    v = 2.0 + rng.uniform(-1.4, 1.4, 40)
    h = 1e-3

    laplacian = (eig((u + h, v)) + eig((u - h, v)) + eig((u, v + h)) + eig((u, v - h))
                 - 4 * eig((u, v))) / h ** 2
    np.testing.assert_allclose(laplacian, eig.laplacian((u, v)), atol=1e-5)

    d_u, d_v = eig.gradient((u, v))
    np.testing.assert_allclose(d_u, (eig((u + h, v)) - eig((u - h, v))) / (2 * h), atol=1e-6)
    np.testing.assert_allclose(d_v, (eig((u, v + h)) - eig((u, v - h))) / (2 * h), atol=1e-6)


def test_cap_chart_errors():
    with pytest.raises(BarrierError, match='degenerate'):
        cap_chart(circle(), half_widths=(0.0,))
    with pytest.raises(BarrierError, match='quarter of the period'):
        cap_chart(circle(), half_widths=(2.0,))
    with pytest.raises(BarrierError, match='needs 2 center'):
        cap_chart(flat_torus(), center=(0.0,))
    with pytest.raises(BarrierError, match='must be positive'):
        cap_chart(circle(), psi='cos(theta) - 0.5')
    with pytest.raises(BarrierError, match='conformal factor'):
        cap_chart(circle(), psi='cos(')
    with pytest.raises(BarrierError, match='degenerate'):
        cap_eigenfunction(CapChart(circle(), (0.0,), (0.0,)))


def test_sigma_closed_form():
    comparison = comparison_warp('exp(r)', 0.0)
    radii = np.linspace(0.0, 10.0, 101)
    sigma = sigma_profile(comparison, 1.0, radii)
    np.testing.assert_allclose(sigma.values, np.exp(-np.exp(-radii)), rtol=1e-10)
    assert sigma.tail == pytest.approx(math.exp(-10), rel=1e-9)

    assert sigma(5.05) == pytest.approx(math.exp(-math.exp(-5.05)), rel=1e-4)
    assert sigma.interpolant is sigma.interpolant
    with pytest.raises(BarrierError, match='sampled on'):
        sigma(11.0)


def test_sigma_rlog2(rlog2_end):
    comparison = radial_comparison(rlog2_end)
    radii = np.linspace(2.0, 40.0, 401)
    sigma = sigma_profile(comparison, 1.0, radii)
    np.testing.assert_allclose(sigma.values, np.exp(-1 / np.log(radii)), rtol=1e-8)
    assert np.all(np.diff(sigma.values) > 0)
    assert np.all((sigma.values > 0) & (sigma.values <= 1))


def test_sigma_errors(plane_end, hyperbolic_end):
    with pytest.raises(BarrierError, match='convergent tail'):
        sigma_profile(radial_comparison(plane_end), 1.0, [1.0, 2.0])

    comparison = radial_comparison(hyperbolic_end)
    with pytest.raises(BarrierError, match='strictly increasing'):
        sigma_profile(comparison, 1.0, [2.0, 1.5])
    with pytest.raises(BarrierError, match='before r0'):
        sigma_profile(comparison, 1.0, [0.5, 2.0])


def test_barrier_2d(rlog2_barrier):
    assert rlog2_barrier.A == -1.0
    assert rlog2_barrier.audit_half_widths == (math.pi / 3,)
    assert rlog2_barrier.audit_r_min == pytest.approx(math.exp(1 / math.log(2)), rel=1e-2)

    r = 20.0
    sigma = math.exp(-1 / math.log(r))
    theta = np.linspace(-1.0, 1.0, 5)
    np.testing.assert_allclose(rlog2_barrier((theta,), r), 1 - sigma * np.cos(theta), rtol=1e-7)

    with pytest.raises(BarrierError, match='extend the grid'):
        barrier_2d(0.0, rlog2_barrier.sigma.comparison, np.linspace(2.0, 4.0, 11))


def test_audit_rlog2(rlog2_barrier, rlog2_end):
    grid = AuditGrid(omega_nodes=33, radial_nodes=129, r_max=60.0)
    reports = refine_audit(rlog2_barrier, rlog2_end, grid, levels=4)
    assert len(reports) == 4
    assert all(report.passed for report in reports)
    assert all(report.max_discrete <= report.allowance for report in reports)
    assert all(report.max_exact <= 1e-10 for report in reports)
    assert all(report.center_monotone for report in reports)
    assert all(report.min_value >= 0 for report in reports)
    assert math.isnan(reports[0].order)
    # the coarse levels are not yet in the asymptotic range
    assert reports[1].order < reports[3].order
    assert reports[3].order >= 1.7
    assert reports[3].grid.radial_nodes == 1025

    keys = [key for key, _ in reports[0].lines('level0_')]
    assert keys[0] == 'level0_grid'
    assert keys[-1] == 'level0_passed'


def test_audit_hyperbolic_torus(torus_barrier, hyperbolic_end):
    reports = refine_audit(torus_barrier, hyperbolic_end, AuditGrid(17, 65, 8.0), levels=3)
    assert all(report.passed for report in reports)
    assert all(report.max_exact <= 0 for report in reports)
    assert all(report.min_inequality >= 0 for report in reports)
    assert all(report.max_discrete <= 0 for report in reports)
    errors = [report.discretization_error for report in reports]
    assert errors[0] > errors[1] > errors[2]
    assert min(report.order for report in reports[1:]) >= 1.8


def test_audit_sinh_circle():
    end = make_end(circle(), 'sinh(r)', r_start=1.0)
    barrier = barrier_2d(1.0, radial_comparison(end), np.linspace(1.0, 12.0, 2001))
    report = audit_superharmonic(barrier, end, AuditGrid())
    assert report.passed
    assert report.max_exact <= 1e-10
    assert report.notes == ()


def test_audit_detects_wrong_end(rlog2_barrier):
    plane = make_end(circle(), 'r', r_start=2.0)
    report = audit_superharmonic(rlog2_barrier, plane, AuditGrid(33, 129, 60.0))
    assert not report.underresolved
    assert report.min_value >= 0
    assert report.max_exact > 0.03
    assert report.max_discrete > report.allowance
    assert not report.passed


def test_audit_underresolved(torus_barrier, hyperbolic_end):
    report = audit_superharmonic(torus_barrier, hyperbolic_end, AuditGrid(9, 3, 8.0))
    assert report.underresolved
    assert not report.passed
    assert any('refine the grid' in note for note in report.notes)


def test_audit_errors(rlog2_barrier, torus_barrier, hyperbolic_end):
    with pytest.raises(BarrierError, match='barrier lives on the circle'):
        audit_superharmonic(rlog2_barrier, hyperbolic_end)
    with pytest.raises(BarrierError, match='is empty'):
        audit_superharmonic(torus_barrier, hyperbolic_end, AuditGrid(r_max=1.0))
    with pytest.raises(BarrierError, match='at least 3 nodes'):
        audit_superharmonic(torus_barrier, hyperbolic_end, AuditGrid(omega_nodes=2))


def test_positivity_margin(rlog2_barrier, torus_barrier):
    observed, bound = positivity_margin(rlog2_barrier, 0.5, 20.0)
    assert observed >= bound > 0

    observed, bound = positivity_margin(torus_barrier, 0.5, 6.0)
    assert observed >= bound > 0

    with pytest.raises(BarrierError, match='rho must lie'):
        positivity_margin(rlog2_barrier, 2.0, 20.0)


def test_conformal_hypotheses(hyperbolic_end):
    chart = cap_chart(flat_torus(), center=(math.pi, 0.0), psi='3 + cos(u)')
    assert chart.eta == pytest.approx(2.0)

    comparison = radial_comparison(hyperbolic_end)
    rescaled = conformal_rescale(chart, comparison)
    assert rescaled.phi_bar.radial(2.0) == pytest.approx(2 * math.sinh(2.0))

    report = check_conformal_hypotheses(chart, hyperbolic_end, comparison)
    assert report.overall == SOLVABLE
