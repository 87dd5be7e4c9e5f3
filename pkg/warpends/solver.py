"""Exhaustion solver for bounded harmonic functions on warped-product ends.

Delta_g u = 0 is discretized with second-order finite differences on a tensor grid of
periodic cross-section nodes times radial nodes, with Dirichlet data f(omega) imposed at the
truncation radius R.  Solving for a growing schedule of R and watching probe values realizes
the Dirichlet problem at infinity.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import integrate, interpolate, sparse
from scipy.sparse import linalg

from warpends.criteria import CONVERGENT, tail_integral
from warpends.geometry import CrossSection, EndSpec, GeometryError, laplacian_coefficients
from warpends.types import ArrayLike, Report
from warpends.warp_expr import WarpExpr, parse_warp

LOG = logging.getLogger(__name__)
LOG.addHandler(logging.NullHandler())


CONVERGED = 'Converged'
NOT_CONVERGED = 'NotConverged'

UNIFORM = 'uniform'
GRADED = 'graded'

DIRECT = 'direct'
BICGSTAB = 'bicgstab'

BOUNDS_SLACK = 1e-9


class AssemblyError(ValueError):
    pass


class SolverError(RuntimeError):
    pass


class SingleEnd(NamedTuple):
    end: EndSpec
    boundary: WarpExpr
    inner: WarpExpr


class TwoEnds(NamedTuple):
    plus: EndSpec
    minus: EndSpec
    boundary_plus: WarpExpr
    boundary_minus: WarpExpr


Topology = Union[SingleEnd, TwoEnds]


class ManifoldConfig(NamedTuple):
    topology: Topology
    bounds: Tuple[float, float]

    @property
    def cross_section(self) -> CrossSection:
        topology = self.topology
        return topology.end.cross_section if isinstance(topology, SingleEnd) else \
            topology.plus.cross_section

    @property
    def ends(self) -> Tuple[EndSpec, ...]:
        topology = self.topology
        if isinstance(topology, SingleEnd):
            return (topology.end,)
        return (topology.plus, topology.minus)

    @property
    def data(self) -> Tuple[WarpExpr, ...]:
        topology = self.topology
        if isinstance(topology, SingleEnd):
            return (topology.boundary, topology.inner)
        return (topology.boundary_plus, topology.boundary_minus)


def data_expression(text: Union[str, float, WarpExpr], section: CrossSection) -> WarpExpr:
    """Boundary datum f(omega): an expression in the cross-section coordinates only"""
    if isinstance(text, WarpExpr):
        if text.coords != section.coords or text.radial:
            raise AssemblyError(f'boundary datum {text} must be a function of {section.coords}')
        return text
    return parse_warp(str(text), section.coords, radial=False)


def data_range(expressions: Sequence[WarpExpr], section: CrossSection,
               samples: int = 64) -> Tuple[float, float]:
    omega = section.mesh(samples)
    values = [expression(omega) for expression in expressions]
    return (float(min(v.min() for v in values)), float(max(v.max() for v in values)))


def manifold_config(topology: Topology, bounds: Optional[Tuple[float, float]] = None,
                    samples: int = 64, gluing_tol: float = 1e-8) -> ManifoldConfig:
    if isinstance(topology, TwoEnds):
        plus, minus = topology.plus, topology.minus
        if plus.cross_section != minus.cross_section:
            raise AssemblyError('glued ends need identical cross-sections, got '
                                f'{plus.cross_section} and {minus.cross_section}')
        if plus.r_start != 0 or minus.r_start != 0:
            raise AssemblyError('glued ends must start at r = 0')
        omega = plus.cross_section.mesh(samples)
        value_gap = np.abs(plus.warp(omega, 0.0) - minus.warp(omega, 0.0)).max()
        slope_gap = np.abs(plus.warp.d_r(omega, 0.0) + minus.warp.d_r(omega, 0.0)).max()
        if max(value_gap, slope_gap) > gluing_tol:
            raise AssemblyError(f'warps are not C^1 glued at r = 0: value mismatch '
                                f'{value_gap:.3g}, derivative mismatch {slope_gap:.3g}')

    config = ManifoldConfig(topology, (0.0, 0.0))
    section = config.cross_section
    for expression in config.data:
        data_expression(expression, section)
    observed = data_range(config.data, section, samples)
    if bounds is None:
        return config._replace(bounds=observed)

    lo, hi = bounds
    if observed[0] < lo or observed[1] > hi:
        raise AssemblyError(f'boundary data range [{observed[0]:g}, {observed[1]:g}] '
                            f'leaves the uniform bounds [{lo:g}, {hi:g}]')
    return config._replace(bounds=(float(lo), float(hi)))


class Resolution(NamedTuple):
    omega_nodes: Union[int, Tuple[int, ...]] = 16
    dr: float = 0.1
    grading: str = UNIFORM


class Probe(NamedTuple):
    omega: Tuple[float, ...]
    r: float


def _graded_step(end: EndSpec, omega: Tuple[np.ndarray, ...], r: float, dr: float) -> float:
    phi = end.warp(omega, r)
    slope = end.warp.d_r(omega, r)
    with np.errstate(divide='ignore'):
        length = np.where(slope > 0, phi / np.where(slope > 0, slope, 1.0), 0.0)
    h = dr * min(max(float(length.min()), 1.0), max(r, 1.0))
    drift = (end.cross_section.n - 1) * float(np.max(slope / phi))
    if drift > 0:
        h = min(h, 1.9 / drift)
    return h


def radial_nodes(end: EndSpec, R: float, resolution: Resolution) -> np.ndarray:
    """Radial nodes from end.r_start to R, uniform or graded by phi/phi_r"""
    lo = end.r_start
    if R <= lo:
        raise AssemblyError(f'truncation radius R={R:g} must exceed r_start={lo:g}')
    if resolution.dr <= 0:
        raise AssemblyError(f'radial spacing must be positive, got {resolution.dr}')

    if resolution.grading == UNIFORM:
        count = max(2, int(math.ceil((R - lo) / resolution.dr - 1e-9)))
        return np.linspace(lo, R, count + 1)
    if resolution.grading != GRADED:
        raise AssemblyError(f'unknown grading {resolution.grading!r}; use {UNIFORM!r} '
                            f'or {GRADED!r}')

    omega = end.cross_section.mesh(resolution.omega_nodes)
    nodes = [lo]
    r = lo
    while True:
        h = _graded_step(end, omega, r, resolution.dr)
        if r + 1.5 * h >= R:
            if R - r > h:
                nodes.append((r + R) / 2)
            nodes.append(R)
            break
        r += h
        nodes.append(r)
    return np.array(nodes)


class Field(NamedTuple):
    """Grid function: values[i, ...] at radius radii[i] over the cross-section axes"""
    coords: Tuple[str, ...]
    lengths: Tuple[float, ...]
    axes: Tuple[np.ndarray, ...]
    radii: np.ndarray
    values: np.ndarray

    def interpolator(self) -> interpolate.RegularGridInterpolator:
        axes = [np.append(axis, length) for axis, length in zip(self.axes, self.lengths)]
        values = self.values
        for dim in range(1, values.ndim):
            first = np.take(values, [0], axis=dim)
            values = np.concatenate([values, first], axis=dim)
        return interpolate.RegularGridInterpolator((self.radii, *axes), values)

    def probe(self, probes: Sequence[Probe]) -> np.ndarray:
        if not probes:
            return np.empty(0)
        points = np.array([[p.r, *(w % L for w, L in zip(p.omega, self.lengths))]
                           for p in probes])
        lo, hi = self.radii[0], self.radii[-1]
        if np.any(points[:, 0] < lo) or np.any(points[:, 0] > hi):
            raise AssemblyError(f'probes must lie in [{lo:g}, {hi:g}]')
        return self.interpolator()(points)


class DiscreteProblem(NamedTuple):
    matrix: sparse.csr_matrix
    rhs: np.ndarray
    boundary_weight: np.ndarray
    radii: np.ndarray
    axes: Tuple[np.ndarray, ...]
    lower: np.ndarray
    upper: np.ndarray
    R: float
    data_range: Tuple[float, float]
    coords: Tuple[str, ...]
    lengths: Tuple[float, ...]

    @property
    def omega_shape(self) -> Tuple[int, ...]:
        return tuple(axis.size for axis in self.axes)

    def constant_residual(self) -> float:
        """max |A 1 - boundary weight|: zero when constants are discrete-harmonic"""
        ones = np.ones(self.matrix.shape[0])
        return float(np.max(np.abs(self.matrix @ ones - self.boundary_weight)))

    def field(self, x: np.ndarray) -> Field:
        interior = x.reshape(self.radii.size - 2, -1)
        values = np.vstack([self.lower[None, :], interior, self.upper[None, :]])
        return Field(self.coords, self.lengths, self.axes, self.radii,
                     values.reshape((self.radii.size,) + self.omega_shape))


def _end_coefficients(end: EndSpec, omega: Tuple[np.ndarray, ...],
                      radii: np.ndarray) -> Tuple[np.ndarray, np.ndarray, List[np.ndarray]]:
    shape = (radii.size, omega[0].size)
    coefficients = laplacian_coefficients(end, tuple(w[None, :] for w in omega),
                                          radii[:, None])
    return (np.broadcast_to(coefficients.c_r, shape), np.broadcast_to(coefficients.c_N, shape),
            [np.broadcast_to(c, shape) for c in coefficients.c_grad])


def _neighbours(counts: Tuple[int, ...], dim: int, step: int) -> np.ndarray:
    index = np.unravel_index(np.arange(int(np.prod(counts))), counts)
    shifted = list(index)
    shifted[dim] = (index[dim] + step) % counts[dim]
    return np.ravel_multi_index(shifted, counts)


def _spacing_error(kind: str, worst: float, spacing: float, required: float) -> AssemblyError:
    return AssemblyError(f'discrete maximum principle fails: {kind} coupling {worst:.3g} < 0; '
                         f'spacing {spacing:.4g} must be at most {required:.4g} '
                         f'(refine dr / omega_nodes or use grading={GRADED!r})')


def assemble(config: ManifoldConfig, R: float, resolution: Resolution) -> DiscreteProblem:
    section = config.cross_section
    counts = section.counts(resolution.omega_nodes)
    axes = section.axes(counts)
    omega = tuple(w.ravel() for w in np.meshgrid(*axes, indexing='ij'))
    size = omega[0].size
    topology = config.topology

    for end in config.ends:
        if R < end.expansive_from:
            raise AssemblyError(f'R={R:g} is below the expansive radius {end.expansive_from:g}')

    if isinstance(topology, SingleEnd):
        radii = radial_nodes(topology.end, R, resolution)
        c_r, c_N, c_grad = _end_coefficients(topology.end, omega, radii[1:-1])
        lower = np.broadcast_to(topology.inner(omega), (size,))
        upper = np.broadcast_to(topology.boundary(omega), (size,))
    else:
        plus = radial_nodes(topology.plus, R, resolution)
        minus = radial_nodes(topology.minus, R, resolution)
        radii = np.concatenate([-minus[::-1], plus[1:]])
        inner = radii[1:-1]
        positive = inner >= 0
        c_r_plus, c_N_plus, grad_plus = _end_coefficients(topology.plus, omega, inner[positive])
        c_r_minus, c_N_minus, grad_minus = _end_coefficients(topology.minus, omega,
                                                             -inner[~positive])
        c_r = np.vstack([-c_r_minus, c_r_plus])
        c_N = np.vstack([c_N_minus, c_N_plus])
        c_grad = [np.vstack([m, p]) for m, p in zip(grad_minus, grad_plus)]
        lower = np.broadcast_to(topology.boundary_minus(omega), (size,))
        upper = np.broadcast_to(topology.boundary_plus(omega), (size,))

    h_minus = (radii[1:-1] - radii[:-2])[:, None]
    h_plus = (radii[2:] - radii[1:-1])[:, None]
    a_lower = (2 - c_r * h_plus) / (h_minus * (h_minus + h_plus))
    a_upper = (2 + c_r * h_minus) / (h_plus * (h_minus + h_plus))

    worst = float(min(a_lower.min(), a_upper.min()))
    if worst < 0:
        drift = float(np.max(np.abs(c_r)))
        raise _spacing_error('radial', worst, float(max(h_minus.max(), h_plus.max())),
                             2.0 / drift)

    angular = []
    for dim, (count, length) in enumerate(zip(counts, section.lengths)):
        if count == 1:
            continue
        k = length / count
        forward = c_N / k ** 2 + c_grad[dim] / (2 * k)
        backward = c_N / k ** 2 - c_grad[dim] / (2 * k)
        worst = float(min(forward.min(), backward.min()))
        if worst < 0:
            ratio = float(np.max(np.abs(c_grad[dim]) / c_N))
            raise _spacing_error(f'{section.coords[dim]}', worst, k, 2.0 / ratio)
        angular.append((dim, forward, backward))

    total = a_lower + a_upper + sum(f + b for _, f, b in angular)
    m = radii.size - 2
    index = np.arange(m * size).reshape(m, size)

    rows = [index.ravel()]
    cols = [index.ravel()]
    vals = [np.ones(m * size)]

    lower_weight = a_lower / total
    upper_weight = a_upper / total
    rows += [index[1:].ravel(), index[:-1].ravel()]
    cols += [index[:-1].ravel(), index[1:].ravel()]
    vals += [-lower_weight[1:].ravel(), -upper_weight[:-1].ravel()]

    for dim, forward, backward in angular:
        for step, coupling in ((1, forward), (-1, backward)):
            neighbour = _neighbours(counts, dim, step)
            rows.append(index.ravel())
            cols.append(index[:, neighbour].ravel())
            vals.append(-(coupling / total).ravel())

    rhs = np.zeros(m * size)
    weight = np.zeros(m * size)
    rhs[index[0]] += lower_weight[0] * lower
    weight[index[0]] += lower_weight[0]
    rhs[index[-1]] += upper_weight[-1] * upper
    weight[index[-1]] += upper_weight[-1]

    matrix = sparse.coo_matrix((np.concatenate(vals), (np.concatenate(rows),
                                                       np.concatenate(cols))),
                               shape=(m * size, m * size)).tocsr()
    LOG.debug('Assembled R=%g: %d radial x %d cross-section nodes, %d nonzeros', R, radii.size,
              size, matrix.nnz)
    bounds = (float(min(lower.min(), upper.min())), float(max(lower.max(), upper.max())))
    return DiscreteProblem(matrix, rhs, weight, radii, axes, np.array(lower), np.array(upper),
                           float(R), bounds, section.coords, section.lengths)


class DiscreteSolution(NamedTuple):
    field: Field
    x: np.ndarray
    residual: float
    iterations: int


def _relative_residual(problem: DiscreteProblem, x: np.ndarray, scale: float) -> float:
    return float(np.linalg.norm(problem.rhs - problem.matrix @ x)) / scale


def solve(problem: DiscreteProblem, tol: float = 1e-10, method: str = DIRECT,
          max_iter: int = 8) -> DiscreteSolution:
    """Solve the assembled system to relative residual ``tol``.

    'direct' factorizes once with SuperLU and applies iterative refinement; 'bicgstab'
    iterates with an incomplete-LU preconditioner.
    """
    matrix = problem.matrix
    norm = float(np.linalg.norm(problem.rhs))
    scale = norm if norm > 0 else 1.0

    if method == DIRECT:
        factor = linalg.splu(matrix.tocsc())
        x = factor.solve(problem.rhs)
        residual = _relative_residual(problem, x, scale)
        iterations = 0
        while residual > tol and iterations < max_iter:
            x = x + factor.solve(problem.rhs - matrix @ x)
            residual = _relative_residual(problem, x, scale)
            iterations += 1
    elif method == BICGSTAB:
        ilu = linalg.spilu(matrix.tocsc(), drop_tol=1e-6, fill_factor=20)
        preconditioner = linalg.LinearOperator(matrix.shape, ilu.solve)
        counter = [0]

        def count(_: np.ndarray) -> None:
            counter[0] += 1

        x, info = linalg.bicgstab(matrix, problem.rhs, rtol=tol, atol=0.0,
                                  maxiter=max_iter * 100, M=preconditioner, callback=count)
        residual = _relative_residual(problem, x, scale)
        iterations = counter[0]
        if info < 0:
            raise SolverError(f'bicgstab breakdown (info={info}) at residual {residual:.3e}')
    else:
        raise SolverError(f'unknown method {method!r}; use {DIRECT!r} or {BICGSTAB!r}')

    if not residual <= tol:
        raise SolverError(f'linear solve stalled at relative residual {residual:.3e} after '
                          f'{iterations} iterations (tolerance {tol:.1e})')
    LOG.debug('Solved R=%g: residual %.3e after %d refinement steps', problem.R, residual,
              iterations)
    return DiscreteSolution(problem.field(x), x, residual, iterations)


class TraceEntry(NamedTuple):
    R: float
    oscillation: float
    sup_change: float
    probe_values: Tuple[float, ...]
    residual: float
    bounds_ok: bool


class SolveResult(NamedTuple):
    field: Field
    residual_norm: float
    trace: Tuple[TraceEntry, ...]
    verdict: str
    probe_limit: Tuple[float, ...]
    bounds_ok: bool
    bounds: Tuple[float, float]

    def lines(self) -> Report:
        lines: Report = [('verdict', self.verdict),
                         ('residual', self.residual_norm),
                         ('bounds', 'ok' if self.bounds_ok else 'violated'),
                         ('min_u', float(self.field.values.min())),
                         ('max_u', float(self.field.values.max()))]
        for entry in self.trace:
            lines.append((f'trace R={entry.R:g}',
                          f'oscillation={entry.oscillation:.6e} '
                          f'sup_change={entry.sup_change:.6e} residual={entry.residual:.3e}'))
        if self.probe_limit:
            lines.append(('probe_limit', self.probe_limit))
        return lines


def oscillation(probes: Sequence[Probe], values: np.ndarray) -> float:
    """Largest spread of probe values among probes sharing a radius"""
    groups: Dict[float, List[float]] = {}
    for probe, value in zip(probes, values):
        groups.setdefault(round(probe.r, 12), []).append(value)
    spreads = [max(group) - min(group) for group in groups.values()]
    return float(max(spreads)) if spreads else 0.0


def within_bounds(field: Field, bounds: Tuple[float, float]) -> bool:
    lo, hi = bounds
    return bool(field.values.min() >= lo - BOUNDS_SLACK
                and field.values.max() <= hi + BOUNDS_SLACK)


def exhaust(config: ManifoldConfig, schedule: Sequence[float], probes: Sequence[Probe],
            tol_exhaustion: float = 1e-4, resolution: Resolution = Resolution(),
            tol: float = 1e-10, method: str = DIRECT, workers: int = 1) -> SolveResult:
    """Solve for every truncation radius of ``schedule`` and test the probes for convergence"""
    schedule = [float(R) for R in schedule]
    if not schedule or any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise AssemblyError(f'schedule must be strictly increasing, got {schedule}')
    if not probes:
        raise SolverError('convergence is judged on probe values; give at least one probe')
    for probe in probes:
        if abs(probe.r) > schedule[0]:
            raise AssemblyError(f'probe at r={probe.r:g} lies beyond R_0={schedule[0]:g}')

    def run(R: float) -> Tuple[DiscreteProblem, DiscreteSolution]:
        try:
            problem = assemble(config, R, resolution)
            return problem, solve(problem, tol, method)
        except AssemblyError as exc:
            raise AssemblyError(f'R={R:g}: {exc}') from exc
        except SolverError as exc:
            raise SolverError(f'R={R:g}: {exc}') from exc

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            solved = list(pool.map(run, schedule))
    else:
        solved = [run(R) for R in schedule]

    trace: List[TraceEntry] = []
    previous: Optional[np.ndarray] = None
    converged_at: Optional[int] = None
    for k, (R, (problem, solution)) in enumerate(zip(schedule, solved)):
        values = solution.field.probe(probes)
        change = math.nan if previous is None else float(np.max(np.abs(values - previous),
                                                                initial=0.0))
        ok = within_bounds(solution.field, config.bounds)
        if not ok:
            LOG.warning('R=%g: solution leaves the data bounds %s', R, config.bounds)
        trace.append(TraceEntry(R, oscillation(probes, values), change,
                                tuple(float(v) for v in values), solution.residual, ok))
        LOG.info('R=%g: probe oscillation %.6g, sup change %.3g', R, trace[-1].oscillation,
                 change)

        if converged_at is None and k >= 2 and trace[-1].sup_change < tol_exhaustion \
                and trace[-2].sup_change < tol_exhaustion:
            converged_at = k
        previous = values

    last = solved[-1][1]
    verdict = CONVERGED if converged_at is not None else NOT_CONVERGED
    limit = trace[-1].probe_values if verdict == CONVERGED else ()
    LOG.info('Exhaustion over %s: %s', schedule, verdict)
    return SolveResult(last.field, last.residual, tuple(trace), verdict, limit,
                       all(entry.bounds_ok for entry in trace), config.bounds)


class ModeProfile(NamedTuple):
    solution: Callable[[ArrayLike], np.ndarray]
    scale: float
    r_start: float
    R: float

    def __call__(self, r: ArrayLike) -> np.ndarray:
        return self.solution(r)[0] / self.scale


def radial_mode_oracle(end: EndSpec, nu2: float, R: float,
                       r_start: Optional[float] = None) -> ModeProfile:
    """h'' + (n-1) phi_r/phi h' - nu2/phi^2 h = 0 with h(r_start) = 0 and h(R) = 1"""
    if not end.warp.is_radial:
        raise GeometryError(f'the mode oracle needs a radial warp, got {end.warp}')
    lo = end.r_start if r_start is None else r_start
    n = end.cross_section.n
    warp = end.warp

    def rhs(r: float, y: np.ndarray) -> List[float]:
        phi = float(warp.radial(r))
        drift = (n - 1) * float(warp.radial_derivative(r)) / phi
        return [y[1], -drift * y[1] + nu2 / phi ** 2 * y[0]]

    solution = integrate.solve_ivp(rhs, (lo, R), [0.0, 1.0], method='DOP853', rtol=1e-12,
                                   atol=1e-14, dense_output=True)
    if not solution.success:
        raise SolverError(f'mode oracle integration failed: {solution.message}')
    scale = float(solution.y[0, -1])
    if not math.isfinite(scale) or scale == 0:
        raise SolverError(f'mode oracle cannot be normalized at R={R:g}')
    return ModeProfile(solution.sol, scale, lo, R)


class LiouvilleWitness(NamedTuple):
    result: SolveResult
    separation: float
    oscillation: float
    sigma_factor: float
    threshold: float
    nonconstant: bool

    def lines(self) -> Report:
        lines: Report = [('separation', self.separation),
                         ('data_oscillation', self.oscillation),
                         ('sigma_factor', self.sigma_factor),
                         ('threshold', self.threshold),
                         ('witness', 'nonconstant' if self.nonconstant else 'constant')]
        lines.extend(self.result.lines())
        return lines


def sigma_factor(end: EndSpec, r: float) -> float:
    """exp(-int_r^inf 1/phi) for radial warps with a convergent tail, else 1"""
    if not end.warp.is_radial:
        return 1.0
    tail = tail_integral(end.warp, r)
    return math.exp(-tail.value) if tail.verdict == CONVERGENT else 1.0


def liouville_witness(config: ManifoldConfig, boundary: Union[str, WarpExpr],
                      probes: Sequence[Probe], schedule: Sequence[float],
                      distinguished: str = 'plus', samples: int = 64,
                      **kwargs) -> LiouvilleWitness:
    """Nonconstant data on one end, the minimum of that data on the others.

    The resulting bounded harmonic function is nonconstant when probe values on the
    distinguished end separate by at least half the data oscillation times sigma.
    """
    section = config.cross_section
    data = data_expression(boundary, section)
    lo, hi = data_range([data], section, samples)
    floor = data_expression(repr(lo) if lo >= 0 else f'-{-lo!r}', section)

    topology = config.topology
    if isinstance(topology, TwoEnds):
        if distinguished == 'plus':
            topology = topology._replace(boundary_plus=data, boundary_minus=floor)
            end = topology.plus
        elif distinguished == 'minus':
            topology = topology._replace(boundary_minus=data, boundary_plus=floor)
            end = topology.minus
        else:
            raise AssemblyError(f'unknown end {distinguished!r}; use "plus" or "minus"')
    else:
        topology = topology._replace(boundary=data, inner=floor)
        end = topology.end

    result = exhaust(manifold_config(topology, samples=samples), schedule, probes, **kwargs)
    values = np.array(result.trace[-1].probe_values)
    separation = float(values.max() - values.min()) if values.size else 0.0
    factor = sigma_factor(end, max(abs(p.r) for p in probes)) if probes else 1.0
    threshold = 0.5 * (hi - lo) * factor
    nonconstant = hi > lo and separation >= threshold
    LOG.info('Liouville witness: separation %.6g against threshold %.6g', separation,
             threshold)
    return LiouvilleWitness(result, separation, hi - lo, factor, threshold, nonconstant)


def exhaust_family(configs: Sequence[ManifoldConfig], schedule: Sequence[float],
                   probes: Sequence[Probe], bounds: Tuple[float, float],
                   **kwargs) -> List[SolveResult]:
    """Independent single ends sharing the uniform bounds m <= f_j <= M"""
    lo, hi = bounds
    for j, config in enumerate(configs):
        if config.bounds[0] < lo or config.bounds[1] > hi:
            raise AssemblyError(f'end {j} has data in [{config.bounds[0]:g}, '
                                f'{config.bounds[1]:g}], outside [{lo:g}, {hi:g}]')
    LOG.warning('Solving %d ends as independent single-end problems', len(configs))
    return [exhaust(config._replace(bounds=(lo, hi)), schedule, probes, **kwargs)
            for config in configs]
