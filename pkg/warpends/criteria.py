"""Solvability criteria for the Dirichlet problem at infinity on an expansive end.

An end is declared solvable when a radial comparison warp phi_bar satisfies
``phi_bar <= phi``, ``0 < phi_bar_r/phi_bar <= phi_r/phi`` on sampled nodes and
``int 1/phi_bar`` converges.
"""

import logging
import math
import warnings
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import integrate

from warpends.geometry import EndSpec, radial_sectional_curvature
from warpends.types import ArrayLike, Report
from warpends.warp_expr import WarpDomainError, WarpError, WarpExpr, WarpField, parse_warp

LOG = logging.getLogger(__name__)
LOG.addHandler(logging.NullHandler())


CONVERGENT = 'Convergent'
DIVERGENT = 'Divergent'
INCONCLUSIVE = 'Inconclusive'

SOLVABLE = 'Solvable'
NOT_ESTABLISHED = 'NotEstablished'

# Exponent band in which the tail fit cannot decide
LOWER_EXPONENT = 0.9
UPPER_EXPONENT = 1.1

HORIZON_VALUE = 1e100
HORIZON_CAP = 1e6

RELATIVE_TOLERANCE = 1e-12


class CriterionError(ValueError):
    pass


class SturmError(ValueError):
    pass


class TailVerdict(NamedTuple):
    verdict: str
    value: float
    error_bound: float
    quadrature: float
    tail: float
    model: str
    exponent: float
    r0: float
    r_max: float
    diagnostics: Tuple[str, ...] = ()

    def lines(self) -> Report:
        return [('integral', self.verdict),
                ('integral_value', self.value),
                ('integral_error', self.error_bound),
                ('tail_model', self.model),
                ('tail_exponent', self.exponent),
                ('integral_range', (self.r0, self.r_max))]


def _inconclusive(r0: float, r_max: float, *diagnostics: str) -> TailVerdict:
    nan = math.nan
    return TailVerdict(INCONCLUSIVE, nan, nan, nan, nan, 'none', nan, r0, r_max,
                       tuple(diagnostics))


def _reciprocal(phi_bar: WarpField) -> Callable[[float], float]:
    def integrand(r: float) -> float:
        return float(1.0 / phi_bar.radial(r))
    return integrand


def integrate_reciprocal(phi_bar: WarpField, lo: float, hi: float,
                         budget: int = 200) -> Tuple[float, float, Tuple[str, ...]]:
    """int_lo^hi dr/phi_bar by adaptive quadrature, in log r where r >= 1.

    Returns the value, the absolute error estimate and quadrature warnings.
    """
    integrand = _reciprocal(phi_bar)
    value, error = 0.0, 0.0
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter('always', integrate.IntegrationWarning)
        if lo < 1.0:
            top = min(hi, 1.0)
            part, part_error = integrate.quad(integrand, lo, top, epsabs=1e-14, epsrel=1e-12,
                                              limit=budget)
            value, error = value + part, error + part_error
        if hi > 1.0:
            start = math.log(max(lo, 1.0))
            part, part_error = integrate.quad(lambda s: math.exp(s) * integrand(math.exp(s)),
                                              start, math.log(hi), epsabs=1e-14,
                                              epsrel=1e-12, limit=budget)
            value, error = value + part, error + part_error

    diagnostics = tuple(str(warning.message).splitlines()[0] for warning in caught)
    return value, error, diagnostics


def tail_horizon(phi_bar: WarpField, r0: float, cap: float = HORIZON_CAP) -> float:
    """First doubling radius where phi_bar exceeds 1e100, at most ``cap``"""
    r = max(2.0 * r0, r0 + 1.0)
    while r < cap:
        try:
            if phi_bar.radial(r) > HORIZON_VALUE:
                return r
        except WarpDomainError:
            return r / 2
        r *= 2
    return cap


class TailFit(NamedTuple):
    model: str
    exponent: float
    residual: float


def _fit(x: np.ndarray, y: np.ndarray) -> Tuple[float, float]:
    design = np.vstack([np.ones_like(x), x]).T
    coefficients, *_ = np.linalg.lstsq(design, y, rcond=None)
    residual = y - design @ coefficients
    return float(coefficients[1]), float(np.sqrt(np.mean(residual ** 2)))


def fit_tail(phi_bar: WarpField, r0: float, r_max: float) -> TailFit:
    """Fit phi_bar ~ r^p and phi_bar ~ r (log r)^q over the last decade before r_max"""
    radii = np.geomspace(max(r0, r_max / 10), r_max, 64)
    values = phi_bar.radial(radii)
    if np.any(values <= 0):
        raise WarpDomainError('comparison warp is not positive', str(phi_bar))

    x, y = np.log(radii), np.log(values)
    power, power_residual = _fit(x, y)
    if radii[0] <= 1.0:
        return TailFit('power', power, power_residual)

    log_exponent, log_residual = _fit(np.log(x), y - x)
    band = LOWER_EXPONENT <= power <= UPPER_EXPONENT
    if band or log_residual <= power_residual:
        return TailFit('log', log_exponent, log_residual)
    return TailFit('power', power, power_residual)


def tail_integral(phi_bar: Union[WarpField, str], r0: float, r_max: Optional[float] = None,
                  budget: int = 200) -> TailVerdict:
    field = phi_bar if isinstance(phi_bar, WarpField) else WarpField(parse_warp(phi_bar))
    top = tail_horizon(field, r0) if r_max is None else r_max
    if top <= r0:
        raise CriterionError(f'tail integral needs r_max > r0, got [{r0}, {top}]')

    try:
        quadrature, error, diagnostics = integrate_reciprocal(field, r0, top, budget)
        fit = fit_tail(field, r0, top)
        edge = float(field.radial(top))
    except WarpDomainError as exc:
        LOG.warning('Tail integral of 1/(%s) is inconclusive: %s', field, exc)
        return _inconclusive(r0, top, str(exc))

    if not all(np.isfinite([quadrature, error, fit.exponent, edge])):
        return _inconclusive(r0, top, 'non-finite samples', *diagnostics)

    if fit.exponent > UPPER_EXPONENT:
        scale = top * math.log(top) if fit.model == 'log' else top
        tail = scale / ((fit.exponent - 1.0) * edge)
        bound = error + tail * min(1.0, 10 * fit.residual)
        verdict = TailVerdict(CONVERGENT, quadrature + tail, bound, quadrature, tail,
                              fit.model, fit.exponent, r0, top, diagnostics)
    elif fit.exponent < LOWER_EXPONENT:
        verdict = TailVerdict(DIVERGENT, math.inf, math.nan, quadrature, math.inf, fit.model,
                              fit.exponent, r0, top, diagnostics)
    else:
        verdict = TailVerdict(INCONCLUSIVE, math.nan, math.nan, quadrature, math.nan,
                              fit.model, fit.exponent, r0, top,
                              diagnostics + (f'exponent {fit.exponent:.3f} inside '
                                             f'[{LOWER_EXPONENT}, {UPPER_EXPONENT}]',))

    LOG.info('Tail integral of 1/(%s) from %s: %s (%s model, exponent %.4g)', field, r0,
             verdict.verdict, fit.model, fit.exponent)
    return verdict


class ComparisonWarp(NamedTuple):
    phi_bar: WarpField
    r0: float
    tail: TailVerdict
    a: float = math.nan
    alpha: float = math.nan


def comparison_warp(phi_bar: Union[str, WarpExpr, WarpField], r0: float,
                    r_max: Optional[float] = None, budget: int = 200,
                    samples: int = 256) -> ComparisonWarp:
    if isinstance(phi_bar, WarpField):
        field = phi_bar
    else:
        try:
            field = WarpField(parse_warp(phi_bar) if isinstance(phi_bar, str) else phi_bar)
        except WarpError as exc:
            raise CriterionError(f'comparison warp {phi_bar}: {exc}') from exc
    if not field.is_radial:
        raise CriterionError(f'comparison warp {field} must depend on r only')

    tail = tail_integral(field, r0, r_max, budget)
    radii = np.linspace(r0, min(tail.r_max, r0 + 50.0), samples)
    try:
        values = field.radial(radii)
        slopes = field.radial_derivative(radii)
    except WarpDomainError as exc:
        raise CriterionError(f'comparison warp {field} on [{r0}, {radii[-1]}]: {exc}') from exc

    if np.any(values <= 0):
        raise CriterionError(f'comparison warp {field} is not positive at '
                             f'r={radii[np.argmax(values <= 0)]:.6g}')
    if np.any(slopes < 0):
        raise CriterionError(f'comparison warp {field} decreases at '
                             f'r={radii[np.argmax(slopes < 0)]:.6g}')

    return ComparisonWarp(field, float(r0), tail)


def radial_comparison(end: EndSpec, r0: Optional[float] = None, **kwargs) -> ComparisonWarp:
    """phi_bar = phi for ends whose warp does not depend on omega"""
    if not end.warp.is_radial:
        raise CriterionError(f'warp {end.warp} depends on the cross-section; '
                             f'give a comparison warp or a curvature constant')
    text = str(end.warp.expr)
    return comparison_warp(text, end.r_start if r0 is None else r0, **kwargs)


class SampleGrid(NamedTuple):
    omega_nodes: int = 128
    radial_nodes: int = 256
    r_max: Optional[float] = None
    seed: int = 0


def _stratified(rng: np.random.Generator, lo: float, hi: float, count: int) -> np.ndarray:
    cells = (np.arange(count) + rng.uniform(size=count)) * ((hi - lo) / count)
    return np.concatenate([[lo], lo + cells])


def sample_points(end: EndSpec, grid: SampleGrid, lo: float,
                  hi: float) -> Tuple[Tuple[np.ndarray, ...], np.ndarray]:
    """Jittered cross-section nodes (flattened) and radii starting at ``lo``"""
    rng = np.random.default_rng(grid.seed)
    section = end.cross_section
    counts = section.counts(grid.omega_nodes)
    axes = [(np.arange(count) + rng.uniform(size=count)) * (length / count)
            for count, length in zip(counts, section.lengths)]
    omega = tuple(w.ravel() for w in np.meshgrid(*axes, indexing='ij'))
    return omega, _stratified(rng, lo, hi, grid.radial_nodes)


def _sample_rows(end: EndSpec, omega: Tuple[np.ndarray, ...]) -> Tuple[np.ndarray, ...]:
    # one row is enough when the warp ignores omega
    if end.warp.is_radial:
        return tuple(w[:1, None] for w in omega)
    return tuple(w[:, None] for w in omega)


class Orderings(NamedTuple):
    domination_ok: bool
    log_derivative_ok: bool
    diagnostics: Tuple[str, ...]


def compare_orderings(phi: np.ndarray, phi_r: np.ndarray, phi_bar: np.ndarray,
                      phi_bar_r: np.ndarray, radii: np.ndarray, strict: bool = True) -> Orderings:
    """Check phi_bar <= phi and 0 < phi_bar_r/phi_bar <= phi_r/phi on a (omega, r) grid.

    ``phi`` and ``phi_r`` have shape (omega, r); the comparison arrays have shape (r,).
    """
    diagnostics = []

    excess = phi_bar[None, :] - phi * (1 + RELATIVE_TOLERANCE)
    domination_ok = bool(np.all(excess <= 0))
    if not domination_ok:
        i, j = np.unravel_index(np.argmax(excess), excess.shape)
        diagnostics.append(f'phi_bar > phi by {excess[i, j]:.3g} at r={radii[j]:.6g}')

    ratio = phi_r / phi
    ratio_bar = phi_bar_r / phi_bar
    lower_ok = bool(np.all(ratio_bar > 0)) if strict else bool(np.all(ratio_bar >= 0))
    if not lower_ok:
        j = int(np.argmin(ratio_bar))  # type: ignore[assignment]
        diagnostics.append(f'phi_bar_r/phi_bar = {ratio_bar[j]:.3g} at r={radii[j]:.6g}')

    gap = ratio_bar[None, :] - ratio - RELATIVE_TOLERANCE * np.abs(ratio)
    upper_ok = bool(np.all(gap <= 0))
    if not upper_ok:
        i, j = np.unravel_index(np.argmax(gap), gap.shape)
        diagnostics.append(f'phi_bar_r/phi_bar exceeds phi_r/phi by {gap[i, j]:.3g} '
                           f'at r={radii[j]:.6g}')

    return Orderings(domination_ok, lower_ok and upper_ok, tuple(diagnostics))


class CriterionReport(NamedTuple):
    domination_ok: bool
    log_derivative_ok: bool
    integral: TailVerdict
    overall: str
    diagnostics: Tuple[str, ...] = ()

    def lines(self) -> Report:
        lines: Report = [('domination', self.domination_ok),
                         ('log_derivative', self.log_derivative_ok)]
        lines.extend(self.integral.lines())
        lines.append(('verdict', self.overall))
        lines.extend(('diagnostic', text) for text in self.diagnostics)
        return lines


def overall_verdict(orderings: Orderings, tail: TailVerdict) -> str:
    solvable = (orderings.domination_ok and orderings.log_derivative_ok
                and tail.verdict == CONVERGENT)
    return SOLVABLE if solvable else NOT_ESTABLISHED


def check_criterion(end: EndSpec, comparison: ComparisonWarp,
                    grid: SampleGrid = SampleGrid()) -> CriterionReport:
    if comparison.r0 < end.r_start:
        raise CriterionError(f'comparison starts at r0={comparison.r0}, before the end '
                             f'starts at {end.r_start}')

    top = grid.r_max or min(comparison.tail.r_max, comparison.r0 + 50.0)
    omega, radii = sample_points(end, grid, comparison.r0, top)
    LOG.debug('Criterion sampling: %d cross-section nodes x %d radii on [%s, %s]',
              omega[0].size, radii.size, comparison.r0, top)

    points = _sample_rows(end, omega)
    try:
        phi = end.warp(points, radii[None, :])
        phi_r = end.warp.d_r(points, radii[None, :])
        phi_bar = comparison.phi_bar.radial(radii)
        phi_bar_r = comparison.phi_bar.radial_derivative(radii)
    except WarpDomainError as exc:
        LOG.warning('Criterion sampling failed: %s', exc)
        tail = comparison.tail._replace(verdict=INCONCLUSIVE,
                                        diagnostics=comparison.tail.diagnostics + (str(exc),))
        return CriterionReport(False, False, tail, NOT_ESTABLISHED, (str(exc),))

    orderings = compare_orderings(phi, phi_r, phi_bar, phi_bar_r, radii,
                                  strict=end.cross_section.n > 2)
    report = CriterionReport(orderings.domination_ok, orderings.log_derivative_ok,
                             comparison.tail, overall_verdict(orderings, comparison.tail),
                             orderings.diagnostics + comparison.tail.diagnostics)
    LOG.info('Criterion for %s against %s: %s', end.warp, comparison.phi_bar, report.overall)
    return report


class CurvatureBound(NamedTuple):
    ok: bool
    max_excess: float
    worst_r: float
    worst_omega: Tuple[float, ...]


def check_curvature_bound(end: EndSpec, bound: Union[float, str], grid: SampleGrid = SampleGrid(
        omega_nodes=32, radial_nodes=256), r_max: Optional[float] = None) -> CurvatureBound:
    """Radial curvature K = -phi_rr/phi against ``bound`` (a number or a function of r)"""
    top = r_max or end.r_start + 20.0
    omega, radii = sample_points(end, grid, end.r_start, top)
    points = _sample_rows(end, omega)

    curvature = radial_sectional_curvature(end, points, radii[None, :])
    if isinstance(bound, str):
        limit = parse_warp(bound)((), radii)[None, :]
    else:
        limit = np.full((1, radii.size), float(bound))

    excess = curvature - limit
    i, j = np.unravel_index(np.argmax(excess), excess.shape)
    tolerance = 1e-9 * max(1.0, float(np.max(np.abs(limit))))
    worst = tuple(float(w[i]) for w in omega)
    return CurvatureBound(bool(excess[i, j] <= tolerance), float(excess[i, j]),
                          float(radii[j]), worst)


def hyperbolic_comparison_warp(end: EndSpec, a: float, grid: SampleGrid = SampleGrid(
        omega_nodes=32, radial_nodes=256), r_max: Optional[float] = None) -> ComparisonWarp:
    """phi_bar = alpha sinh(a (r - r_start) + 1) for ends with curvature <= -a^2.

    alpha is 0.9 times the smallest of the bounds sinh(1) alpha < min phi,
    a alpha coth(1) < min phi_r/phi and a alpha cosh(1) < min phi_r at r_start.
    """
    if a == 0:
        raise CriterionError('the hyperbolic comparison needs a curvature constant a != 0')
    a = abs(a)

    bound = check_curvature_bound(end, -a ** 2, grid)
    if not bound.ok:
        raise CriterionError(f'radial curvature exceeds -a^2 = {-a ** 2:g} by '
                             f'{bound.max_excess:.3g} at r={bound.worst_r:.6g}, '
                             f'omega={bound.worst_omega}')

    omega = end.cross_section.mesh(grid.omega_nodes)
    phi = end.warp(omega, end.r_start)
    phi_r = end.warp.d_r(omega, end.r_start)
    least_phi, least_ratio, least_slope = phi.min(), (phi_r / phi).min(), phi_r.min()
    if min(least_phi, least_ratio, least_slope) <= 0:
        raise CriterionError(f'warp {end.warp} needs phi, phi_r > 0 at r_start={end.r_start}; '
                             f'min phi={least_phi:.3g}, min phi_r={least_slope:.3g}')

    coth1 = math.cosh(1) / math.sinh(1)
    effective = a
    if a * coth1 > least_ratio * (1 + 1e-9):
        effective = 0.9 * math.tanh(1) * least_ratio
        LOG.warning('Reducing hyperbolic constant from %g to %g so that phi_bar_r/phi_bar '
                    '<= phi_r/phi at r_start', a, effective)

    alpha = 0.9 * min(least_phi / math.sinh(1), least_ratio / effective,
                      least_slope / (effective * math.cosh(1)))
    alpha, effective = float(alpha), float(effective)
    text = f'{alpha!r} * sinh({effective!r} * (r - {float(end.r_start)!r}) + 1)'
    LOG.info('Hyperbolic comparison warp %s', text)
    comparison = comparison_warp(text, end.r_start, r_max)
    return comparison._replace(a=effective, alpha=alpha)


class SturmVerdict(NamedTuple):
    part: str
    violation: float
    holds: bool
    radii: np.ndarray
    u: np.ndarray
    v: np.ndarray


def sturm_compare(u0: float, u0p: float, v0: float, v0p: float,
                  quotient_u: Callable[[ArrayLike], ArrayLike],
                  quotient_v: Callable[[ArrayLike], ArrayLike], a: float, b: float,
                  part: str = 'a', samples: int = 1000, tol: float = 1e-8) -> SturmVerdict:
    """Integrate u'' = q_u u and v'' = q_v v on [a, b] and check the comparison conclusion.

    Part 'a': u(a) <= v(a), u'(a) <= v'(a) gives u <= v.  Part 'b': u'/u <= v'/v at a
    gives u'/u <= v'/v.  Both need q_u <= q_v on [a, b] and positive solutions.
    """
    if not a < b:
        raise SturmError(f'empty interval [{a}, {b}]')
    if part == 'a':
        if not (u0 <= v0 and u0p <= v0p):
            raise SturmError(f'part a needs u(a) <= v(a) and u\'(a) <= v\'(a), got '
                             f'({u0}, {u0p}) against ({v0}, {v0p})')
    elif part == 'b':
        if u0 <= 0 or v0 <= 0 or u0p * v0 - v0p * u0 > RELATIVE_TOLERANCE * abs(v0p * u0):
            raise SturmError(f'part b needs u\'/u <= v\'/v at a with positive values, got '
                             f'{u0p}/{u0} against {v0p}/{v0}')
    else:
        raise SturmError(f'unknown part {part!r}; use "a" or "b"')

    radii = np.linspace(a, b, samples)
    qu = np.broadcast_to(np.asarray(quotient_u(radii), dtype=float), radii.shape)
    qv = np.broadcast_to(np.asarray(quotient_v(radii), dtype=float), radii.shape)
    above = qu - qv - RELATIVE_TOLERANCE * np.abs(qv)
    if np.any(above > 0):
        raise SturmError(f'quotient ordering fails at r={radii[np.argmax(above)]:.6g}')

    def rhs(r: float, y: np.ndarray) -> List[float]:
        return [y[1], float(quotient_u(r)) * y[0], y[3], float(quotient_v(r)) * y[2]]

    solution = integrate.solve_ivp(rhs, (a, b), [u0, u0p, v0, v0p], method='RK45',
                                   rtol=1e-11, atol=1e-13, dense_output=True)
    if not solution.success:
        raise SturmError(f'integration stopped before r={b}: {solution.message}')

    states = solution.sol(radii)
    if not np.all(np.isfinite(states)):
        raise SturmError(f'solutions blow up before r={b}')
    u, du, v, dv = states
    if np.any(u <= 0) or np.any(v <= 0):
        raise SturmError('solutions must stay positive on the interval')

    if part == 'a':
        violation = max(0.0, float(np.max(u - v)))
    else:
        violation = max(0.0, float(np.max(du / u - dv / v)))
    return SturmVerdict(part, violation, violation <= tol, radii, u, v)


def sturm_checks(end: EndSpec, comparison: ComparisonWarp,
                 omega: Sequence[float] = (), r_max: Optional[float] = None) -> SturmVerdict:
    """Part b for phi_bar against phi along one cross-section point"""
    point = tuple(omega) or end.cross_section.origin()
    a = comparison.r0
    b = r_max or a + 10.0

    def quotient_bar(r: ArrayLike) -> np.ndarray:
        return comparison.phi_bar.radial_second_derivative(r) / comparison.phi_bar.radial(r)

    def quotient(r: ArrayLike) -> np.ndarray:
        return end.warp.d_rr(point, r) / end.warp(point, r)

    return sturm_compare(float(comparison.phi_bar.radial(a)),
                         float(comparison.phi_bar.radial_derivative(a)),
                         float(end.warp(point, a)), float(end.warp.d_r(point, a)),
                         quotient_bar, quotient, a, b, part='b')
