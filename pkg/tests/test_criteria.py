import math

import numpy as np
import pytest

from warpends.criteria import (CONVERGENT, DIVERGENT, INCONCLUSIVE, NOT_ESTABLISHED, SOLVABLE,
                               CriterionError, SampleGrid, SturmError, check_criterion,
                               check_curvature_bound, compare_orderings, comparison_warp,
                               hyperbolic_comparison_warp, radial_comparison, sample_points,
                               sturm_checks, sturm_compare, tail_integral)
from warpends.geometry import circle, flat_torus, make_end


def test_tail_integral_rlog2():
    verdict = tail_integral('r * log(r)^2', 2.0)
    assert verdict.verdict == CONVERGENT
    assert verdict.model == 'log'
    assert verdict.exponent == pytest.approx(2.0, abs=1e-6)
    assert verdict.value == pytest.approx(1 / math.log(2), abs=1e-8)
    assert verdict.r_max == 1e6


def test_tail_integral_sinh():
    verdict = tail_integral('sinh(r)', 1.0)
    assert verdict.verdict == CONVERGENT
    assert verdict.r_max == 256.0
    assert verdict.value == pytest.approx(math.log(1 / math.tanh(0.5)), rel=1e-9)


def test_tail_integral_power():
    verdict = tail_integral('r^2', 1.0)
    assert verdict.verdict == CONVERGENT
    assert verdict.model == 'power'
    assert verdict.value == pytest.approx(1.0, rel=1e-9)

    verdict = tail_integral('r', 1.0)
    assert verdict.verdict == DIVERGENT
    assert verdict.value == math.inf


def test_tail_integral_borderline():
    verdict = tail_integral('r * log(r)', 2.0)
    assert verdict.verdict == INCONCLUSIVE
    assert verdict.exponent == pytest.approx(1.0, abs=1e-6)
    assert 'inside' in verdict.diagnostics[-1]

    with pytest.raises(CriterionError, match='r_max > r0'):
        tail_integral('r', 2.0, r_max=1.0)


def test_tail_lines():
    keys = [key for key, _ in tail_integral('sinh(r)', 1.0).lines()]
    assert keys == ['integral', 'integral_value', 'integral_error', 'tail_model',
                    'tail_exponent', 'integral_range']


def test_comparison_warp_errors(hyperbolic_end):
    with pytest.raises(CriterionError, match='theta'):
        comparison_warp('theta * r', 1.0)

    with pytest.raises(CriterionError, match='decreases'):
        comparison_warp('exp(-r) + 1', 0.0)

    end = make_end(circle(), 'r * (2 + cos(theta))', r_start=1.0)
    with pytest.raises(CriterionError, match='depends on the cross-section'):
        radial_comparison(end)

    with pytest.raises(CriterionError, match='before the end starts'):
        check_criterion(hyperbolic_end, comparison_warp('sinh(r)', 0.5))


def test_sample_points_are_seeded(hyperbolic_end):
    grid = SampleGrid(omega_nodes=4, radial_nodes=8)
    omega, radii = sample_points(hyperbolic_end, grid, 1.0, 5.0)
    again, radii_again = sample_points(hyperbolic_end, grid, 1.0, 5.0)
    assert all(np.array_equal(a, b) for a, b in zip(omega, again))
    assert np.array_equal(radii, radii_again)
    assert omega[0].size == 16
    assert radii[0] == 1.0
    assert np.all((radii >= 1.0) & (radii <= 5.0))

    _, other = sample_points(hyperbolic_end, grid._replace(seed=1), 1.0, 5.0)
    assert not np.array_equal(radii, other)


def test_hyperbolic_end_is_solvable(hyperbolic_end):
    report = check_criterion(hyperbolic_end, radial_comparison(hyperbolic_end))
    assert report.overall == SOLVABLE
    assert report.domination_ok and report.log_derivative_ok
    assert report.integral.verdict == CONVERGENT

    keys = [key for key, _ in report.lines()]
    assert keys[:2] == ['domination', 'log_derivative']
    assert 'verdict' in keys


def test_sinr_rlog2_end_is_solvable(sinr_rlog2_end):
    report = check_criterion(sinr_rlog2_end, radial_comparison(sinr_rlog2_end))
    assert report.overall == SOLVABLE
    assert report.integral.model == 'log'


def test_plane_is_not_established(plane_end):
    report = check_criterion(plane_end, radial_comparison(plane_end))
    assert report.overall == NOT_ESTABLISHED
    assert report.integral.verdict == DIVERGENT
    assert report.domination_ok


def test_domination_failure(hyperbolic_end):
    report = check_criterion(hyperbolic_end, comparison_warp('2 * sinh(r)', 1.0))
    assert report.overall == NOT_ESTABLISHED
    assert not report.domination_ok
    assert report.log_derivative_ok
    assert any(text.startswith('phi_bar > phi') for text in report.diagnostics)


def test_domain_error_is_inconclusive():
    end = make_end(circle(), 'sqrt(60 - r) + r', r_start=1.0)
    report = check_criterion(end, comparison_warp('r', 1.0),
                             SampleGrid(omega_nodes=8, radial_nodes=32, r_max=100.0))
    assert report.overall == NOT_ESTABLISHED
    assert report.integral.verdict == INCONCLUSIVE
    assert 'negative argument' in report.diagnostics[0]


def test_log_derivative_strictness():
    flat = make_end(circle(), 'cosh(r)')
    assert check_criterion(flat, radial_comparison(flat)).overall == SOLVABLE

    solid = make_end(flat_torus(), 'cosh(r)')
    report = check_criterion(solid, radial_comparison(solid))
    assert not report.log_derivative_ok
    assert report.overall == NOT_ESTABLISHED


def test_compare_orderings_shapes():
    radii = np.linspace(1.0, 2.0, 5)
    phi = np.vstack([np.exp(radii), 2 * np.exp(radii)])
    orderings = compare_orderings(phi, phi, np.exp(radii), np.exp(radii), radii)
    assert orderings.domination_ok and orderings.log_derivative_ok
    assert orderings.diagnostics == ()

    orderings = compare_orderings(phi, phi, np.exp(radii), 2 * np.exp(radii), radii)
    assert not orderings.log_derivative_ok
    assert 'exceeds' in orderings.diagnostics[0]


def test_hyperbolic_comparison(hyperbolic_end):
    comparison = hyperbolic_comparison_warp(hyperbolic_end, -1.0)
    assert comparison.a == 1.0
    assert comparison.alpha == pytest.approx(0.9)
    assert check_criterion(hyperbolic_end, comparison).overall == SOLVABLE


def test_hyperbolic_comparison_reduces_constant():
    end = make_end(flat_torus(), 'cosh(r)', r_start=0.5)
    comparison = hyperbolic_comparison_warp(end, 1.0)
    assert comparison.a == pytest.approx(0.9 * math.tanh(1) * math.tanh(0.5))
    assert check_criterion(end, comparison).overall == SOLVABLE


def test_hyperbolic_comparison_errors(plane_end, hyperbolic_end):
    with pytest.raises(CriterionError, match='radial curvature exceeds'):
        hyperbolic_comparison_warp(plane_end, 1.0)
    with pytest.raises(CriterionError, match='a != 0'):
        hyperbolic_comparison_warp(hyperbolic_end, 0.0)


def test_curvature_bound(rlog2_end):
    bound = check_curvature_bound(rlog2_end, '-1/(r^2 * log(r))')
    assert bound.ok
    assert bound.max_excess < 0

    bound = check_curvature_bound(rlog2_end, '-3/(r^2 * log(r))')
    assert not bound.ok
    assert bound.worst_r > math.exp(2)

    assert check_curvature_bound(rlog2_end, 0.0).ok


def _quotients(c, d, k, e, m):
    def quotient_u(r):
        return c + d * np.sin(k * r)

    def quotient_v(r):
        return quotient_u(r) + e * (1 + np.cos(m * r))

    return quotient_u, quotient_v


def test_sturm_comparison_random_pairs():
    rng = np.random.default_rng(5)
    for _ in range(20):
        c = rng.uniform(0.5, 2.0)
        quotient_u, quotient_v = _quotients(c, rng.uniform(0, 0.4) * c, rng.uniform(0.5, 3),
                                            rng.uniform(0, 1), rng.uniform(0.5, 3))
        u0, u0p = rng.uniform(0.5, 1.0), rng.uniform(0.0, 1.0)

        v0, v0p = u0 + rng.uniform(0.05, 0.5), u0p + rng.uniform(0.05, 0.5)
        verdict = sturm_compare(u0, u0p, v0, v0p, quotient_u, quotient_v, 0.0, 3.0, part='a')
        assert verdict.holds
        assert verdict.violation <= 1e-8
        assert np.all(verdict.u <= verdict.v + 1e-8)

        scale = rng.uniform(0.5, 2.0)
        v0, v0p = scale * u0, scale * u0p + rng.uniform(0.05, 0.5) * scale * u0
        verdict = sturm_compare(u0, u0p, v0, v0p, quotient_u, quotient_v, 0.0, 3.0, part='b')
        assert verdict.holds


def test_sturm_preconditions():
    one, two = _quotients(1.0, 0.0, 1.0, 1.0, 1.0)

    with pytest.raises(SturmError, match='part a needs'):
        sturm_compare(2.0, 0.0, 1.0, 0.0, one, two, 0.0, 1.0)
    with pytest.raises(SturmError, match='part b needs'):
        sturm_compare(1.0, 2.0, 1.0, 1.0, one, two, 0.0, 1.0, part='b')
    with pytest.raises(SturmError, match='unknown part'):
        sturm_compare(1.0, 0.0, 1.0, 0.0, one, two, 0.0, 1.0, part='c')
    with pytest.raises(SturmError, match='quotient ordering'):
        sturm_compare(1.0, 0.0, 1.0, 0.0, two, one, 0.0, 1.0)
    with pytest.raises(SturmError, match='empty interval'):
        sturm_compare(1.0, 0.0, 1.0, 0.0, one, two, 1.0, 1.0)


def test_sturm_checks(hyperbolic_end):
    comparison = comparison_warp('0.5 * sinh(0.5 * r + 0.5)', 1.0)
    verdict = sturm_checks(hyperbolic_end, comparison)
    assert verdict.part == 'b'
    assert verdict.holds
    assert verdict.radii[-1] == 11.0

    same = sturm_checks(hyperbolic_end, radial_comparison(hyperbolic_end), r_max=5.0)
    assert same.holds


@pytest.mark.parametrize('scale', [1.0, 0.5, 0.1])
@pytest.mark.parametrize('fixture', ['hyperbolic_end', 'sinr_rlog2_end'])
def test_scaled_comparison_keeps_orderings(request, fixture, scale):
    end = request.getfixturevalue(fixture)
    comparison = comparison_warp(f'{scale!r} * ({end.warp.expr})', end.r_start)
    report = check_criterion(end, comparison)
    assert report.domination_ok
    assert report.log_derivative_ok
    assert report.overall == SOLVABLE


def test_hyperbolic_comparison_exp2r():
    end = make_end(flat_torus(), 'exp(2 * r)')
    comparison = hyperbolic_comparison_warp(end, 2.0)
    assert type(comparison.alpha) is float and type(comparison.a) is float
    assert comparison.a == pytest.approx(0.9 * math.tanh(1) * 2.0)
    assert comparison.alpha == pytest.approx(0.9 / math.sinh(1))
    assert 'np.' not in str(comparison.phi_bar)
    assert check_criterion(end, comparison).overall == SOLVABLE
