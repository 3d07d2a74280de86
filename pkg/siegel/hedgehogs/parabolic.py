"""
Dynamics of germs tangent to the identity: petals, Fatou coordinates,
backward tracking of disks and the flower picture.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from matplotlib.path import Path

from .compacta import AdmissibleDomain, CompactApprox, GridSpec, siegel_compact
from .exceptions import OutsideSector, PolygonSelfIntersection, PreconditionError, SectorExit, TrackingError
from .orbits import Sample, VerificationReport
from .series import (
    DEFAULT_TOL, DOUBLE_BITS, GermMap, InverseMap, TruncatedGerm, series_exp, series_log1p, tangency_order,
)

logger = logging.getLogger(__name__)

DIRECTIONS = ('attracting', 'repelling')
MODELS = ('asymptotic', 'leading')
DEFAULT_REFINE_DEPTH = 1000
MAX_PETAL_RADIUS = 0.5
DOMINANCE = 0.1
POLYGON_VERTICES = 64
STRETCH = 3.0
MAX_VERTICES = 4096
SECTOR_SLACK = 1e-9


def axis_angles(c: complex, d: int, direction: str) -> List[float]:
    """Angles in [0, 2 pi) where c z^d is real negative (attracting) or positive (repelling)"""
    target = np.pi if direction == 'attracting' else 0.0
    return [float(np.mod((target - np.angle(c) + 2 * np.pi * j) / d, 2 * np.pi)) for j in range(d)]


@dataclass
class FatouChart:
    """
    Petal data of T(z) = z + c_d z^(d+1) + ... and the model used at the end
    of the orbit: chi_0(w) = sum_k e_k w^k + b log w, with e_{-d} = -1/(d c_d).
    """
    d: int
    c_d: complex
    direction: str
    axis_angles: List[float]
    chi0_scale: complex
    refine_depth: int = DEFAULT_REFINE_DEPTH
    radius: float = MAX_PETAL_RADIUS
    model: str = 'asymptotic'
    coefficients: Dict[int, complex] = field(default_factory=dict)
    log_coefficient: complex = 0j

    @property
    def half_angle(self) -> float:
        return np.pi / (2 * self.d)

    def nearest_axis(self, z) -> np.ndarray:
        angles = np.asarray(self.axis_angles)
        offset = np.angle(np.exp(1j * (np.angle(np.asarray(z))[..., None] - angles)))
        return angles[np.argmin(np.abs(offset), axis=-1)]

    def axis_offset(self, z) -> np.ndarray:
        axis = self.nearest_axis(z)
        return np.abs(np.angle(np.asarray(z) * np.exp(-1j * axis)))

    def in_sector(self, z) -> np.ndarray:
        z = np.asarray(z)
        return (self.axis_offset(z) <= self.half_angle * (1 + SECTOR_SLACK)) & (np.abs(z) <= self.radius) & (z != 0)

    def log(self, w) -> np.ndarray:
        """log w with the branch cut opposite the nearest petal axis"""
        w = np.asarray(w, dtype=complex)
        axis = self.nearest_axis(w)
        return np.log(np.abs(w)) + 1j * (axis + np.angle(w * np.exp(-1j * axis)))

    def chi0(self, w):
        w = np.asarray(w, dtype=complex)
        value = np.zeros_like(w)
        for k, e in self.coefficients.items():
            value = value + e * w ** k
        if self.log_coefficient:
            value = value + self.log_coefficient * self.log(w)
        return value


def _abel_model(T: TruncatedGerm, d: int, c: complex) -> Tuple[Dict[int, complex], complex]:
    """
    Formal solution of chi_0(T(w)) = chi_0(w) + 1 of the form
    sum_{k=-d}^{J-d} e_k w^k + b log w, solved degree by degree with e_0 = 0.
    """
    a = np.array([complex(x) for x in T.array(bits=DOUBLE_BITS)])
    n = T.order - 1
    J = n - d
    u = np.zeros(n + 1, dtype=complex)
    u[1:] = a[2:n + 2]
    L = series_log1p(u, n)
    E = {}
    for k in range(-d, J - d + 1):
        if k:
            E[k] = series_exp(k * L, n)
            E[k][0] -= 1

    e: Dict[int, complex] = {}
    b = 0j
    for j in range(J + 1):
        R = -1.0 + 0j if j == 0 else 0j
        for k, ek in e.items():
            m = j - k
            if d <= m <= n:
                R += ek * E[k][m]
        if j > d:
            R += b * L[j]
        if j == d:
            b = -R / c
        else:
            k = j - d
            e[k] = -R / (k * c)
    return e, b


def petal_radius(T: TruncatedGerm, d: int, c: complex, angles: Sequence[float], samples: int = 64) -> float:
    """
    Largest r (at most 0.5) with |T(z) - z - c z^(d+1)| <= 0.1 |c z^(d+1)| on the
    sectors of half-angle pi/(2d) about ``angles``, truncated at radius r.
    """
    F = GermMap(T.to_precision(DOUBLE_BITS))
    spread = np.linspace(-np.pi / (2 * d), np.pi / (2 * d), samples)
    directions = np.exp(1j * (np.asarray(angles)[:, None] + spread[None, :])).ravel()
    r = MAX_PETAL_RADIUS
    while r > 1e-6:
        z = np.concatenate([f * r * directions for f in (0.25, 0.5, 1.0)])
        lead = c * z ** (d + 1)
        if np.all(np.abs(F(z) - z - lead) <= DOMINANCE * np.abs(lead)):
            return r
        r *= 0.9
    return r


def petal_axes(T: TruncatedGerm, direction: str = 'attracting', refine_depth: int = DEFAULT_REFINE_DEPTH,
               model: str = 'asymptotic', tol: float = DEFAULT_TOL) -> FatouChart:
    """Tangency data, petal axes, petal radius and the Fatou model of T"""
    if direction not in DIRECTIONS:
        raise ValueError(f'unknown direction {direction!r}')
    if model not in MODELS:
        raise ValueError(f'unknown Fatou model {model!r}')
    tangency = tangency_order(T, tol)
    if tangency.is_identity:
        raise PreconditionError('T != id', f'{T.tag or "germ"} is the identity to order {T.order}: no petals')
    d, c = tangency.degree, complex(tangency.coefficient)
    angles = axis_angles(c, d, direction)
    if model == 'asymptotic':
        coefficients, b = _abel_model(T, d, c)
    else:
        coefficients, b = {-d: -1 / (d * c)}, 0j
    radius = petal_radius(T, d, c, angles)
    return FatouChart(d, c, direction, angles, -1 / (d * c), refine_depth, radius, model, coefficients, b)


def _stepper(T: TruncatedGerm, direction: str):
    if direction == 'attracting':
        return GermMap(T.to_precision(DOUBLE_BITS))
    return InverseMap(T.to_precision(DOUBLE_BITS), 'newton')


def fatou_coordinate(T: TruncatedGerm, chart: FatouChart, z):
    """
    chi(z) = chi_0(T^n(z)) - n on an attracting petal and chi_0(T^-n(z)) + n on a
    repelling one, with n = chart.refine_depth. In both cases chi(T(z)) = chi(z) + 1.

    Accepts a scalar or an array of petal points.
    """
    w = np.asarray(z, dtype=complex)
    if not np.all(chart.in_sector(w)):
        raise OutsideSector('z in petal sector',
                            f'points must lie within {chart.half_angle:.4f} rad of a {chart.direction} axis '
                            f'and below the petal radius {chart.radius:.4g}')
    step = _stepper(T, chart.direction)
    for i in range(1, chart.refine_depth + 1):
        w = step(w)
        if not np.all(chart.in_sector(w)):
            raise SectorExit(i)
    shift = -chart.refine_depth if chart.direction == 'attracting' else chart.refine_depth
    value = chart.chi0(w) + shift
    return complex(value) if value.ndim == 0 else value


def abel_residual(T: TruncatedGerm, chart: FatouChart, z):
    """|chi(T z) - chi(z) - 1| (attracting) or |chi(T^-1 z) - chi(z) + 1| (repelling)"""
    z = np.asarray(z, dtype=complex)
    image = _stepper(T, chart.direction)(z)
    expected = 1.0 if chart.direction == 'attracting' else -1.0
    residual = np.abs(np.asarray(fatou_coordinate(T, chart, image)) - np.asarray(fatou_coordinate(T, chart, z))
                      - expected)
    return float(residual) if residual.ndim == 0 else residual


@dataclass
class TrackedDomain:
    """Polygon approximating the boundary of T^-n(B_0) and the basepoint T^-n(z_0)"""
    vertices: np.ndarray
    basepoint: complex
    n: int

    @property
    def diameter(self) -> float:
        v = self.vertices
        return float(np.max(np.abs(v[:, None] - v[None, :])))

    def boundary_distance(self, point: Optional[complex] = None) -> float:
        """Distance from a point (the basepoint by default) to the polygon boundary"""
        p = self.basepoint if point is None else point
        a = self.vertices
        b = np.roll(a, -1)
        edge = b - a
        t = np.clip(np.real(np.conj(edge) * (p - a)) / np.maximum(np.abs(edge) ** 2, 1e-300), 0, 1)
        return float(np.min(np.abs(a + t * edge - p)))

    def contains(self, point: complex) -> bool:
        path = Path(np.column_stack([self.vertices.real, self.vertices.imag]))
        return bool(path.contains_point((point.real, point.imag)))


def _cross(o, p, q):
    return np.imag(np.conj(p - o) * (q - o))


def self_intersects(vertices: np.ndarray) -> bool:
    """Proper crossing between two non-adjacent edges of a closed polygon"""
    a = vertices
    b = np.roll(a, -1)
    count = len(a)
    i, j = np.triu_indices(count, k=2)
    keep = ~((i == 0) & (j == count - 1))
    i, j = i[keep], j[keep]
    d1 = _cross(a[i], b[i], a[j])
    d2 = _cross(a[i], b[i], b[j])
    d3 = _cross(a[j], b[j], a[i])
    d4 = _cross(a[j], b[j], b[i])
    return bool(np.any((d1 * d2 < 0) & (d3 * d4 < 0)))


def track_backward(T: TruncatedGerm, z0: complex, rho: float, n_max: int,
                   vertices: int = POLYGON_VERTICES, tol: float = DEFAULT_TOL) -> List[TrackedDomain]:
    """
    B_n = T^-n(B_0) for the disk B_0 of center z0 and radius rho, n = 0 .. n_max.

    The boundary polygon carries its parameters on the circle of B_0; after each
    step an edge longer than 3x the mean edge gets a midpoint, computed afresh
    as T^-n of the corresponding point of the circle. Tracking stops with
    PolygonSelfIntersection, carrying the domains computed so far.
    """
    chart = petal_axes(T, 'repelling', tol=tol)
    offset = float(chart.axis_offset(z0))
    if not 0 < rho < abs(z0) or offset + np.arcsin(rho / abs(z0)) > chart.half_angle * (1 + SECTOR_SLACK):
        raise OutsideSector('B_0 inside a repelling petal sector',
                            f'disk at {z0} of radius {rho} is not inside a repelling sector of T')
    inverse = InverseMap(T.to_precision(DOUBLE_BITS), 'newton')

    def pull(points: np.ndarray, n: int) -> np.ndarray:
        for _ in range(n):
            points = inverse(points)
        return points

    params = 2 * np.pi * np.arange(vertices) / vertices
    polygon = z0 + rho * np.exp(1j * params)
    base = complex(z0)
    domains = [TrackedDomain(polygon.copy(), base, 0)]
    for n in range(1, n_max + 1):
        polygon = inverse(polygon)
        base = complex(inverse(base))
        while len(polygon) < MAX_VERTICES:
            lengths = np.abs(np.roll(polygon, -1) - polygon)
            long_edges = np.nonzero(lengths > STRETCH * lengths.mean())[0]
            if not len(long_edges):
                break
            nxt = (long_edges + 1) % len(params)
            upper = np.where(nxt == 0, params[0] + 2 * np.pi, params[nxt])
            mids = (params[long_edges] + upper) / 2
            fresh = pull(z0 + rho * np.exp(1j * mids), n)
            params = np.concatenate([params, np.mod(mids, 2 * np.pi)])
            polygon = np.concatenate([polygon, fresh])
            order = np.argsort(params)
            params, polygon = params[order], polygon[order]
            logger.debug('track_backward n=%d: resampled %d edges', n, len(long_edges))

        domain = TrackedDomain(polygon.copy(), base, n)
        if self_intersects(polygon):
            raise PolygonSelfIntersection(n, domains)
        if not domain.contains(base):
            raise TrackingError(n, 'basepoint left the tracked polygon', domains)
        domains.append(domain)
    return domains


def verify_lemma32(T: TruncatedGerm, z0: complex, rho: float, n_range: Sequence[int],
                   floor_factor: float = 0.1, slope_tolerance: float = 0.2,
                   tol: float = DEFAULT_TOL, domains: Optional[List[TrackedDomain]] = None) -> VerificationReport:
    """
    Ratios dist(z_n, boundary of B_n) / |z_n|^(d+1) over n_range: their minimum must
    stay above floor_factor times their median, and log dist against log |z_n|
    must have slope d + 1.
    """
    n_range = sorted(set(int(n) for n in n_range))
    d = tangency_order(T, tol).degree
    if d is None:
        raise PreconditionError('T != id')
    if domains is None or len(domains) <= n_range[-1]:
        domains = track_backward(T, z0, rho, n_range[-1], tol=tol)

    rows = []
    ratios = []
    for n in n_range:
        D = domains[n]
        r = abs(D.basepoint)
        dist = D.boundary_distance()
        rows.append(Sample(r=r, k=n, error=dist))
        ratios.append(dist / r ** (d + 1))
    median = float(np.median(ratios))
    floor = floor_factor * median
    for row, ratio in zip(rows, ratios):
        row.ceiling = floor * row.r ** (d + 1)
        row.ok = ratio >= floor

    constants = {'ratio_min': float(min(ratios)), 'ratio_median': median, 'floor': floor}
    moduli = [row.r for row in rows]
    degenerate = len(set(moduli)) < 2
    slope = None
    if not degenerate:
        slope = float(np.polyfit(np.log(moduli), np.log([row.error for row in rows]), 1)[0])
    expected = float(d + 1)
    passed = all(row.ok for row in rows) and (degenerate or abs(slope - expected) <= slope_tolerance)
    notes = [] if not degenerate else ['single |z_n|: slope not fitted']
    return VerificationReport('lemma32', rows, slope, expected, slope_tolerance, constants, passed, degenerate, notes)


def fatou_flower(T: TruncatedGerm, U: AdmissibleDomain, grid: GridSpec, threads: int = 1) -> CompactApprox:
    """Non-escaping component of 0 for a germ tangent to the identity"""
    return siegel_compact(T, U, grid, threads=threads)


def _ray_density(compact: CompactApprox, angles: Sequence[float], samples: int) -> float:
    radius = compact.domain.get('radius', compact.grid.extent)
    t = np.linspace(compact.grid.cell, 0.95 * radius, samples)
    points = (t[None, :] * np.exp(1j * np.asarray(angles))[:, None]).ravel()
    iy, ix, on_grid = compact.grid.pixel_of(points)
    return float(compact.mask[iy[on_grid], ix[on_grid]].mean())


def axis_densities(compact: CompactApprox, chart: FatouChart, samples: int = 200) -> Dict[str, float]:
    """Mask density along attracting axes, repelling axes and the bisectors between them"""
    attracting = axis_angles(chart.c_d, chart.d, 'attracting')
    repelling = axis_angles(chart.c_d, chart.d, 'repelling')
    bisectors = [a + chart.half_angle for a in attracting] + [a - chart.half_angle for a in attracting]
    return {
        'attracting': _ray_density(compact, attracting, samples),
        'repelling': _ray_density(compact, repelling, samples),
        'bisector': _ray_density(compact, bisectors, samples),
    }
