"""Warped-product ends g = dr^2 + phi(omega, r)^2 g_N over flat cross-sections"""

import logging
import math
from typing import NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from warpends.types import ArrayLike, Point
from warpends.warp_expr import WarpDomainError, WarpExpr, WarpField, parse_warp

LOG = logging.getLogger(__name__)
LOG.addHandler(logging.NullHandler())


CIRCLE = 'circle'
TORUS = 'torus'


class GeometryError(ValueError):
    pass


class CrossSection(NamedTuple):
    kind: str
    lengths: Tuple[float, ...]

    @property
    def coords(self) -> Tuple[str, ...]:
        return ('theta',) if self.kind == CIRCLE else ('u', 'v')

    @property
    def dimension(self) -> int:
        return len(self.lengths)

    @property
    def n(self) -> int:
        """Dimension of the end"""
        return self.dimension + 1

    def origin(self) -> Tuple[float, ...]:
        return tuple(0.0 for _ in self.lengths)

    def counts(self, nodes: Union[int, Sequence[int]]) -> Tuple[int, ...]:
        if isinstance(nodes, (int, np.integer)):
            counts = tuple(int(nodes) for _ in self.lengths)
        else:
            counts = tuple(int(count) for count in nodes)

        if len(counts) != self.dimension or min(counts) < 1:
            raise GeometryError(f'{self.kind} needs {self.dimension} positive node counts, '
                                f'got {nodes}')
        return counts

    def axes(self, nodes: Union[int, Sequence[int]]) -> Tuple[np.ndarray, ...]:
        """Periodic node coordinates, spacing L/count, starting at 0"""
        return tuple(np.arange(count) * (length / count)
                     for count, length in zip(self.counts(nodes), self.lengths))

    def mesh(self, nodes: Union[int, Sequence[int]]) -> Tuple[np.ndarray, ...]:
        """Flattened tensor mesh of :meth:`axes`"""
        grids = np.meshgrid(*self.axes(nodes), indexing='ij')
        return tuple(grid.ravel() for grid in grids)

    def displacement(self, omega: Point, center: Sequence[float]) -> Tuple[np.ndarray, ...]:
        """Periodic displacement omega - center, wrapped into [-L/2, L/2)"""
        return tuple((np.asarray(w, dtype=float) - c + length / 2) % length - length / 2
                     for w, c, length in zip(omega, center, self.lengths))


def circle() -> CrossSection:
    return CrossSection(CIRCLE, (2 * math.pi,))


def flat_torus(length_u: float = 2 * math.pi, length_v: float = 2 * math.pi) -> CrossSection:
    if length_u <= 0 or length_v <= 0:
        raise GeometryError(f'torus side lengths must be positive, got ({length_u}, {length_v})')
    return CrossSection(TORUS, (float(length_u), float(length_v)))


def cross_section(kind: str, lengths: Optional[Sequence[float]] = None) -> CrossSection:
    if kind == CIRCLE:
        if lengths is not None and tuple(lengths) != (2 * math.pi,):
            raise GeometryError('the circle cross-section has circumference 2*pi')
        return circle()
    if kind == TORUS:
        return flat_torus(*(lengths or ()))
    raise GeometryError(f'unknown cross-section {kind!r}; use {CIRCLE!r} or {TORUS!r}')


class EndSpec(NamedTuple):
    cross_section: CrossSection
    warp: WarpField
    r_start: float
    expansive_from: float


def _sample_omega(section: CrossSection) -> Tuple[np.ndarray, ...]:
    return section.mesh(8 if section.dimension == 1 else 3)


def _locate(section: CrossSection, omega: Tuple[np.ndarray, ...], index: int) -> str:
    point = ', '.join(f'{name}={w[index]:.6g}' for name, w in zip(section.coords, omega))
    return f'({point})' if point else '()'


def make_end(section: CrossSection, warp: Union[str, WarpExpr, WarpField],
             r_start: float = 0.0, expansive_from: Optional[float] = None,
             horizon: Optional[float] = None, samples: int = 1000) -> EndSpec:
    """Build an end after checking positivity and expansiveness of the warp on samples.

    The warp is sampled on roughly ``samples`` points of cross-section nodes times radii in
    ``[r_start, horizon]``.  ``expansive_from`` defaults to the smallest sampled radius
    beyond which phi_r > 0 everywhere.
    """
    if r_start < 0:
        raise GeometryError(f'r_start must be >= 0, got {r_start}')
    if isinstance(warp, str):
        warp = parse_warp(warp, section.coords)
    expr = warp.expr if isinstance(warp, WarpField) else warp
    if expr.coords != section.coords:
        raise GeometryError(f'warp {expr} is declared over {expr.coords}, '
                            f'the {section.kind} uses {section.coords}')

    field = WarpField(expr)
    top = r_start + 50.0 if horizon is None else horizon
    omega = _sample_omega(section)
    radii = np.linspace(r_start, top, max(samples // omega[0].size, 8))

    points = tuple(w[:, None] for w in omega)
    try:
        values = field(points, radii[None, :])
        slopes = field.d_r(points, radii[None, :])
    except WarpDomainError as exc:
        raise GeometryError(f'warp {expr} cannot be evaluated on [{r_start}, {top}]: '
                            f'{exc}') from exc

    bad = np.argwhere(values <= 0)
    if bad.size:
        i, j = bad[0]
        raise GeometryError(f'warp {expr} is not positive at r={radii[j]:.6g}, '
                            f'omega={_locate(section, omega, i)}')

    flat = np.any(slopes <= 0, axis=0)
    if expansive_from is None:
        if flat[-1]:
            raise GeometryError(f'warp {expr} is not expansive: phi_r <= 0 at r={top:.6g}')
        expansive_from = float(radii[np.flatnonzero(flat)[-1] + 1]) if flat.any() else r_start
    else:
        bad = np.argwhere((slopes <= 0) & (radii[None, :] >= expansive_from))
        if bad.size:
            i, j = bad[0]
            raise GeometryError(f'warp {expr} is not expansive from r={expansive_from}: '
                                f'phi_r <= 0 at r={radii[j]:.6g}, '
                                f'omega={_locate(section, omega, i)}')

    LOG.info('End over %s with warp %s, r_start=%s, expansive from %s',
             section.kind, expr, r_start, expansive_from)
    return EndSpec(section, WarpField(expr, (r_start, top)), float(r_start),
                   float(expansive_from))


def _positive_warp(end: EndSpec, omega: Point, r: ArrayLike) -> np.ndarray:
    phi = end.warp(omega, r)
    if np.any(phi <= 0):
        raise WarpDomainError('warp is not positive', str(end.warp))
    return phi


def radial_sectional_curvature(end: EndSpec, omega: Point, r: ArrayLike) -> np.ndarray:
    """Sectional curvature of planes spanned by d/dr and a tangential direction"""
    phi = _positive_warp(end, omega, r)
    return -end.warp.d_rr(omega, r) / phi


class CurvatureProfile(NamedTuple):
    radii: np.ndarray
    values: np.ndarray
    signs: np.ndarray

    @property
    def both_signs(self) -> bool:
        return bool(np.any(self.signs > 0) and np.any(self.signs < 0))

    @property
    def label(self) -> str:
        if self.both_signs:
            return 'both'
        if np.all(self.signs < 0):
            return 'negative'
        if np.all(self.signs > 0):
            return 'positive'
        return 'zero' if np.all(self.signs == 0) else 'mixed'

    @property
    def points(self) -> Sequence[Tuple[float, int]]:
        return list(zip(self.radii.tolist(), self.signs.tolist()))

    def summary(self) -> str:
        interval = f'[{self.radii[0]:g},{self.radii[-1]:g}]'
        if self.both_signs:
            return f'both signs present on {interval}'
        if self.label == 'mixed':
            return f'one sign and zeros on {interval}'
        return f'all {self.label} on {interval}'


def curvature_sign_profile(end: EndSpec, r_min: float, r_max: float, samples: int,
                           omega: Optional[Point] = None) -> CurvatureProfile:
    if not r_min < r_max:
        raise GeometryError(f'empty radial range [{r_min}, {r_max}]')
    if samples < 2:
        raise GeometryError(f'need at least 2 samples, got {samples}')

    point = end.cross_section.origin() if omega is None else omega
    radii = np.linspace(r_min, r_max, samples)
    values = radial_sectional_curvature(end, point, radii)
    return CurvatureProfile(radii, values, np.sign(values).astype(int))


class LaplacianCoefficients(NamedTuple):
    """Delta_g = c_rr d_rr + c_r d_r + c_N Delta_N + c_grad . grad_N"""
    c_rr: np.ndarray
    c_r: np.ndarray
    c_N: np.ndarray
    c_grad: Tuple[np.ndarray, ...]


def laplacian_coefficients(end: EndSpec, omega: Point, r: ArrayLike) -> LaplacianCoefficients:
    n = end.cross_section.n
    phi = _positive_warp(end, omega, r)
    c_r = (n - 1) * end.warp.d_r(omega, r) / phi
    c_N = 1.0 / phi ** 2
    if n == 3:
        c_grad = tuple(np.zeros_like(phi) for _ in end.warp.d_omega)
    else:
        c_grad = tuple((n - 3) * d(omega, r) / phi ** 3 for d in end.warp.d_omega)
    return LaplacianCoefficients(np.ones_like(phi), c_r, c_N, c_grad)


def christoffel_curvature_oracle(end: EndSpec, omega: Point, r: ArrayLike, h: float = 1e-3,
                                 psi: float = 1.0) -> np.ndarray:
    """Radial curvature from finite differences of the metric alone.

    With g_aa = (psi phi)^2: Gamma^r_aa = -d_r g_aa / 2, Gamma^a_ra = d_r g_aa / (2 g_aa),
    and K = (d_r Gamma^r_aa - Gamma^r_aa Gamma^a_ra) / g_aa.  Only warp values are used.
    """
    _positive_warp(end, omega, r)

    def metric(radius: ArrayLike) -> np.ndarray:
        return (psi * end.warp(omega, radius)) ** 2

    def gamma_r_aa(radius: ArrayLike) -> np.ndarray:
        return -(metric(radius + h) - metric(radius - h)) / (4 * h)

    def gamma_a_ra(radius: ArrayLike) -> np.ndarray:
        return (metric(radius + h) - metric(radius - h)) / (4 * h * metric(radius))

    r = np.asarray(r, dtype=float)
    d_gamma = (gamma_r_aa(r + h) - gamma_r_aa(r - h)) / (2 * h)
    return (d_gamma - gamma_r_aa(r) * gamma_a_ra(r)) / metric(r)
