"""Local barriers at points at infinity and their superharmonicity audit.

A barrier is Theta_A(omega, r) = sigma(r) vartheta(omega) - A where vartheta is the first
Dirichlet eigenfunction of a cap around p, sigma(r) = exp(-int_r^inf lambda1/phi_bar) and
A = vartheta(p) = -1.  On the circle with a half-width pi/2 cap this is the two-dimensional
barrier 1 - sigma(r) cos(theta - theta0).
"""

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import interpolate

from warpends.criteria import (CONVERGENT, ComparisonWarp, CriterionReport, SampleGrid,
                               compare_orderings, comparison_warp, overall_verdict,
                               sample_points, tail_integral)
from warpends.geometry import CrossSection, EndSpec, circle, laplacian_coefficients
from warpends.types import ArrayLike, Point, Report
from warpends.warp_expr import WarpError, WarpExpr, parse_warp

LOG = logging.getLogger(__name__)
LOG.addHandler(logging.NullHandler())


GAUSS_NODES, GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(20)

# the discrete Laplacian may exceed the tolerance by DISCRETE_SLACK * h^2 times the largest
# magnitude of its terms, h the coarsest spacing
DISCRETE_SLACK = 1.0


class BarrierError(ValueError):
    pass


class CapChart(NamedTuple):
    cross_section: CrossSection
    center: Tuple[float, ...]
    half_widths: Tuple[float, ...]
    psi: Optional[WarpExpr] = None
    eta: float = 1.0

    def local(self, omega: Point) -> Tuple[np.ndarray, ...]:
        return self.cross_section.displacement(omega, self.center)

    def contains(self, omega: Point) -> np.ndarray:
        inside = [np.abs(d) <= w for d, w in zip(self.local(omega), self.half_widths)]
        return np.logical_and.reduce(inside)

    def conformal_factor(self, omega: Point) -> np.ndarray:
        if self.psi is None:
            return np.ones(np.broadcast_shapes(*(np.shape(w) for w in omega)))
        return self.psi(omega)


def cap_chart(section: CrossSection, center: Optional[Sequence[float]] = None,
              half_widths: Optional[Sequence[float]] = None,
              psi: Union[None, str, WarpExpr] = None, samples: int = 65) -> CapChart:
    center = tuple(float(c) for c in (center or section.origin()))
    widths = tuple(float(w) for w in (half_widths or [L / 4 for L in section.lengths]))
    if len(center) != section.dimension or len(widths) != section.dimension:
        raise BarrierError(f'a cap on the {section.kind} needs {section.dimension} '
                           f'center coordinates and half-widths')
    if min(widths) <= 0:
        raise BarrierError(f'degenerate cap with half-widths {widths}')
    for width, length in zip(widths, section.lengths):
        if width > length / 4 + 1e-12:
            raise BarrierError(f'cap half-width {width:g} exceeds a quarter of the period '
                               f'{length:g}')

    eta = 1.0
    if isinstance(psi, str):
        try:
            psi = parse_warp(psi, section.coords, radial=False)
        except WarpError as exc:
            raise BarrierError(f'conformal factor: {exc}') from exc
    if psi is not None:
        axes = [c + np.linspace(-w, w, samples) for c, w in zip(center, widths)]
        omega = tuple(np.meshgrid(*axes, indexing='ij'))
        eta = float(psi(omega).min())
        if eta <= 0:
            raise BarrierError(f'conformal factor {psi} must be positive on the cap, '
                               f'min {eta:.3g}')

    return CapChart(section, center, widths, psi, eta)


class CapEigenfunction(NamedTuple):
    """vartheta = -prod cos(pi d_i / (2 w_i)) inside the cap, 0 outside"""
    chart: CapChart
    lambda1: float
    A: float = -1.0

    def __call__(self, omega: Point) -> np.ndarray:
        factors = [np.cos(math.pi * d / (2 * w))
                   for d, w in zip(self.chart.local(omega), self.chart.half_widths)]
        value = -np.prod(np.broadcast_arrays(*factors), axis=0)
        return np.where(self.chart.contains(omega), value, 0.0)

    def laplacian(self, omega: Point) -> np.ndarray:
        return -self.lambda1 ** 2 * self(omega)

    def gradient(self, omega: Point) -> Tuple[np.ndarray, ...]:
        local = self.chart.local(omega)
        angles = [math.pi * d / (2 * w) for d, w in zip(local, self.chart.half_widths)]
        inside = self.chart.contains(omega)
        gradient = []
        for i, w in enumerate(self.chart.half_widths):
            part = math.pi / (2 * w) * np.sin(angles[i])
            for j, angle in enumerate(angles):
                if j != i:
                    part = part * np.cos(angle)
            gradient.append(np.where(inside, part, 0.0))
        return tuple(gradient)


def cap_eigenfunction(chart: CapChart) -> CapEigenfunction:
    if min(chart.half_widths) <= 0:
        raise BarrierError(f'degenerate cap with half-widths {chart.half_widths}')
    lambda1 = math.sqrt(sum((math.pi / (2 * w)) ** 2 for w in chart.half_widths))
    return CapEigenfunction(chart, lambda1)


@dataclass(frozen=True, eq=False)
class SigmaProfile:
    radii: np.ndarray
    values: np.ndarray
    lambda1: float
    comparison: ComparisonWarp
    tail: float

    def __call__(self, r: ArrayLike) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if np.any(r < self.radii[0]) or np.any(r > self.radii[-1]):
            raise BarrierError(f'sigma is sampled on [{self.radii[0]:g}, {self.radii[-1]:g}]')
        return self.interpolant(r)

    @cached_property
    def interpolant(self) -> interpolate.PchipInterpolator:
        return interpolate.PchipInterpolator(self.radii, self.values)

    def derivative(self, r: ArrayLike, sigma: ArrayLike) -> np.ndarray:
        return self.lambda1 * np.asarray(sigma) / self.comparison.phi_bar.radial(r)

    def second_derivative(self, r: ArrayLike, sigma: ArrayLike) -> np.ndarray:
        phi_bar = self.comparison.phi_bar.radial(r)
        slope = self.comparison.phi_bar.radial_derivative(r)
        return np.asarray(sigma) * (self.lambda1 ** 2 - self.lambda1 * slope) / phi_bar ** 2


def _segment_integrals(comparison: ComparisonWarp, radii: np.ndarray) -> np.ndarray:
    lo, hi = radii[:-1], radii[1:]
    half = (hi - lo)[:, None] / 2
    nodes = (lo + hi)[:, None] / 2 + half * GAUSS_NODES[None, :]
    values = 1.0 / comparison.phi_bar.radial(nodes)
    return (half * values * GAUSS_WEIGHTS[None, :]).sum(axis=1)


def sigma_profile(comparison: ComparisonWarp, lambda1: float,
                  r_grid: Sequence[float]) -> SigmaProfile:
    if comparison.tail.verdict != CONVERGENT:
        raise BarrierError(f'sigma needs a convergent tail integral, got '
                           f'{comparison.tail.verdict}')

    radii = np.asarray(r_grid, dtype=float)
    if radii.size < 2 or np.any(np.diff(radii) <= 0):
        raise BarrierError('the sigma grid must be strictly increasing')
    if radii[0] < comparison.r0:
        raise BarrierError(f'the sigma grid starts at {radii[0]:g}, before r0={comparison.r0}')

    last = tail_integral(comparison.phi_bar, radii[-1])
    if last.verdict != CONVERGENT:
        raise BarrierError(f'tail integral from r={radii[-1]:g} is {last.verdict}')

    segments = _segment_integrals(comparison, radii)
    tails = np.empty_like(radii)
    tails[-1] = last.value
    tails[:-1] = last.value + np.cumsum(segments[::-1])[::-1]
    return SigmaProfile(radii, np.exp(-lambda1 * tails), lambda1, comparison, last.value)


class Barrier(NamedTuple):
    chart: CapChart
    eig: CapEigenfunction
    sigma: SigmaProfile
    r0: float
    audit_half_widths: Tuple[float, ...]
    audit_r_min: float

    @property
    def A(self) -> float:
        return self.eig.A

    def __call__(self, omega: Point, r: ArrayLike) -> np.ndarray:
        return self.sigma(r) * self.eig(omega) - self.A


def build_barrier(chart: CapChart, comparison: ComparisonWarp,
                  r_grid: Sequence[float]) -> Barrier:
    eig = cap_eigenfunction(chart)
    sigma = sigma_profile(comparison, eig.lambda1, r_grid)
    return Barrier(chart, eig, sigma, float(sigma.radii[0]), chart.half_widths,
                   float(sigma.radii[0]))


def barrier_2d(theta0: float, comparison: ComparisonWarp, r_grid: Sequence[float]) -> Barrier:
    """v = 1 - sigma(r) cos(theta - theta0) on |theta - theta0| < pi/2.

    The audit is restricted to |theta - theta0| <= pi/3 and r >= R with sigma(R) >= 1/2.
    """
    section = circle()
    chart = CapChart(section, (float(theta0),), (math.pi / 2,))
    eig = cap_eigenfunction(chart)
    sigma = sigma_profile(comparison, eig.lambda1, r_grid)

    above = np.flatnonzero(sigma.values >= 0.5)
    if not above.size:
        raise BarrierError(f'sigma stays below 1/2 up to r={sigma.radii[-1]:g}; extend the grid')
    return Barrier(chart, eig, sigma, float(sigma.radii[0]), (math.pi / 3,),
                   float(sigma.radii[above[0]]))


class AuditGrid(NamedTuple):
    omega_nodes: int = 33
    radial_nodes: int = 129
    r_max: float = 12.0
    r_min: Optional[float] = None

    def refined(self) -> 'AuditGrid':
        return self._replace(omega_nodes=2 * (self.omega_nodes - 1) + 1,
                             radial_nodes=2 * (self.radial_nodes - 1) + 1)


class AuditReport(NamedTuple):
    max_discrete: float
    max_exact: float
    min_inequality: float
    discretization_error: float
    min_value: float
    center_value: float
    center_monotone: bool
    h_r: float
    h_omega: Tuple[float, ...]
    grid: AuditGrid
    underresolved: bool
    passed: bool
    order: float = math.nan
    notes: Tuple[str, ...] = ()
    allowance: float = 0.0

    def lines(self, prefix: str = '') -> Report:
        return [(f'{prefix}grid', (*[self.grid.omega_nodes] * len(self.h_omega),
                                   self.grid.radial_nodes)),
                (f'{prefix}h_r', self.h_r),
                (f'{prefix}max_discrete_laplacian', self.max_discrete),
                (f'{prefix}max_exact_laplacian', self.max_exact),
                (f'{prefix}min_inequality_residual', self.min_inequality),
                (f'{prefix}discretization_error', self.discretization_error),
                (f'{prefix}min_value', self.min_value),
                (f'{prefix}center_value', self.center_value),
                (f'{prefix}center_monotone', self.center_monotone),
                (f'{prefix}underresolved', self.underresolved),
                (f'{prefix}order', self.order),
                (f'{prefix}discrete_allowance', self.allowance),
                (f'{prefix}passed', self.passed)]


def _shifted(values: np.ndarray, axis: int, offset: int) -> np.ndarray:
    """Interior block of ``values`` moved by ``offset`` nodes along ``axis``"""
    index = [slice(1, -1)] * values.ndim
    index[axis] = slice(1 + offset, values.shape[axis] - 1 + offset)
    return values[tuple(index)]


def _second_difference(values: np.ndarray, axis: int, h: float) -> np.ndarray:
    return (_shifted(values, axis, 1) - 2 * _shifted(values, axis, 0)
            + _shifted(values, axis, -1)) / h ** 2


def _first_difference(values: np.ndarray, axis: int, h: float) -> np.ndarray:
    return (_shifted(values, axis, 1) - _shifted(values, axis, -1)) / (2 * h)


def audit_superharmonic(barrier: Barrier, end: EndSpec, grid: AuditGrid = AuditGrid(),
                        tol: float = 1e-6) -> AuditReport:
    """Evaluate the discrete and exact Laplacian of the barrier on a cap x radial grid"""
    section = end.cross_section
    if barrier.chart.cross_section != section:
        raise BarrierError(f'barrier lives on the {barrier.chart.cross_section.kind}, '
                           f'the end on the {section.kind}')

    r_lo = max(barrier.audit_r_min, grid.r_min if grid.r_min is not None else -math.inf)
    if grid.r_max <= r_lo:
        raise BarrierError(f'audit range [{r_lo:g}, {grid.r_max:g}] is empty')
    if grid.omega_nodes < 3 or grid.radial_nodes < 3:
        raise BarrierError('the audit needs at least 3 nodes per direction')

    radii = np.linspace(r_lo, grid.r_max, grid.radial_nodes)
    sigma = sigma_profile(barrier.sigma.comparison, barrier.eig.lambda1,
                          radii).values  # type: ignore[arg-type]
    axes = [c + np.linspace(-w, w, grid.omega_nodes)
            for c, w in zip(barrier.chart.center, barrier.audit_half_widths)]
    mesh = np.meshgrid(*axes, indexing='ij')
    h_r = radii[1] - radii[0]
    h_omega = tuple(float(axis[1] - axis[0]) for axis in axes)

    dims = len(axes)
    shape = (radii.size,) + mesh[0].shape
    column = (-1,) + (1,) * dims
    r = radii.reshape(column)
    s = sigma.reshape(column)
    omega = tuple(m[None, ...] for m in mesh)

    coefficients = laplacian_coefficients(end, omega, r)
    c_r = np.broadcast_to(coefficients.c_r, shape)
    c_N = np.broadcast_to(coefficients.c_N, shape)
    c_grad = [np.broadcast_to(c, shape) for c in coefficients.c_grad]

    theta = barrier.eig(tuple(mesh))[None, ...]
    values = s * theta - barrier.A

    terms = [_second_difference(values, 0, h_r),
             _shifted(c_r, 0, 0) * _first_difference(values, 0, h_r)]
    for axis in range(1, dims + 1):
        h = h_omega[axis - 1]
        terms.append(_shifted(c_N, 0, 0) * _second_difference(values, axis, h))
        terms.append(_shifted(c_grad[axis - 1], 0, 0) * _first_difference(values, axis, h))
    discrete = sum(terms[1:], terms[0])
    magnitude = float(np.max(sum(np.abs(term) for term in terms)))

    profile = barrier.sigma
    d_sigma = profile.derivative(r, s)
    dd_sigma = profile.second_derivative(r, s)
    gradient = barrier.eig.gradient(tuple(mesh))
    exact = (dd_sigma * theta + c_r * d_sigma * theta
             + c_N * s * barrier.eig.laplacian(tuple(mesh))[None, ...])
    for c, g in zip(c_grad, gradient):
        exact = exact + c * s * g[None, ...]
    exact = _shifted(np.broadcast_to(exact, shape), 0, 0)

    notes = []
    inequality = dd_sigma + c_r * d_sigma - c_N * barrier.eig.lambda1 ** 2 * s
    if any(np.any(c != 0) for c in c_grad):
        notes.append('gradient term present: the radial inequality is not sufficient alone')

    phi = 1.0 / np.sqrt(c_N)
    jumps = [float(np.max(h_r * np.abs(c_r))) > 2.0,
             float(np.max(sigma[1:] / sigma[:-1])) > 2.0,
             float(np.max(np.maximum(phi[1:] / phi[:-1], phi[:-1] / phi[1:]))) > 2.0]
    underresolved = any(jumps)
    if underresolved:
        notes.append('radial spacing does not resolve phi or sigma; refine the grid')
        LOG.warning('Barrier audit grid is underresolved (h_r=%g)', h_r)

    center = sigma * barrier.eig(barrier.chart.center) - barrier.A
    max_discrete = float(discrete.max())
    max_exact = float(exact.max())
    min_value = float(values.min())
    allowance = tol + DISCRETE_SLACK * float(max(h_r, *h_omega)) ** 2 * magnitude
    passed = not underresolved and max_discrete <= allowance and min_value >= -tol

    LOG.info('Barrier audit on %s nodes: max discrete %.3e, max exact %.3e, %s',
             values.shape, max_discrete, max_exact, 'passed' if passed else 'failed')
    return AuditReport(max_discrete, max_exact, float(inequality.min()),
                       float(np.max(np.abs(discrete - exact))), min_value,
                       float(center.ravel()[-1]), bool(np.all(np.diff(center.ravel()) <= 0)),
                       float(h_r), h_omega, grid, underresolved, passed, notes=tuple(notes),
                       allowance=allowance)


def refine_audit(barrier: Barrier, end: EndSpec, grid: AuditGrid = AuditGrid(),
                 levels: int = 3, tol: float = 1e-6) -> List[AuditReport]:
    """Audit on nested grids; ``order`` is the observed order of the discretization error"""
    reports: List[AuditReport] = []
    for level in range(levels):
        report = audit_superharmonic(barrier, end, grid, tol)
        if reports:
            previous = reports[-1]
            ratio = previous.discretization_error / report.discretization_error
            report = report._replace(order=math.log(ratio) / math.log(previous.h_r / report.h_r))
        reports.append(report)
        grid = grid.refined()
    return reports


def positivity_margin(barrier: Barrier, rho: float, r: float,
                      samples: int = 65) -> Tuple[float, float]:
    """Smallest barrier value at cap nodes at least ``rho`` away from p, and its lower bound.

    The bound is (1 - cos(pi rho / (2 w))) sigma(r) eta with w the widest half-width.
    """
    widths = barrier.chart.half_widths
    if not 0 < rho <= min(widths):
        raise BarrierError(f'rho must lie in (0, {min(widths):g}]')

    axes = [c + np.linspace(-w, w, samples) for c, w in zip(barrier.chart.center, widths)]
    mesh = tuple(np.meshgrid(*axes, indexing='ij'))
    distance = np.max(np.abs(np.stack(barrier.chart.local(mesh))), axis=0)
    values = barrier(mesh, r)[distance >= rho - 1e-12]

    sigma = float(barrier.sigma(r))
    bound = (1 - math.cos(math.pi * rho / (2 * max(widths)))) * sigma * min(1.0, barrier.chart.eta)
    return float(values.min()), bound


def conformal_rescale(chart: CapChart, comparison: ComparisonWarp) -> ComparisonWarp:
    """mu_bar = eta phi_bar for the rescaled warp mu = psi phi on the cap"""
    text = f'{float(chart.eta)!r} * ({comparison.phi_bar.expr})'
    return comparison_warp(text, comparison.r0, comparison.tail.r_max)


def check_conformal_hypotheses(chart: CapChart, end: EndSpec, comparison: ComparisonWarp,
                               grid: SampleGrid = SampleGrid(omega_nodes=32)) -> CriterionReport:
    """Criterion hypotheses for mu = psi phi against mu_bar = eta phi_bar on the cap"""
    rescaled = conformal_rescale(chart, comparison)
    top = grid.r_max or min(rescaled.tail.r_max, rescaled.r0 + 50.0)
    omega, radii = sample_points(end, grid, rescaled.r0, top)

    inside = chart.contains(omega)
    points = tuple(w[inside][:, None] for w in omega)
    psi = chart.conformal_factor(points)
    mu = psi * end.warp(points, radii[None, :])
    mu_r = psi * end.warp.d_r(points, radii[None, :])
    orderings = compare_orderings(mu, mu_r, rescaled.phi_bar.radial(radii),
                                  rescaled.phi_bar.radial_derivative(radii), radii,
                                  strict=end.cross_section.n > 2)
    return CriterionReport(orderings.domination_ok, orderings.log_derivative_ok, rescaled.tail,
                           overall_verdict(orderings, rescaled.tail), orderings.diagnostics)
