"""
Grid approximations of Siegel compacta.

K(U) is approximated as the 4-connected component of the pixel of 0 in the set
of pixels whose forward and backward orbits stay in the closed domain for
max_iter steps. Arrays are indexed [iy, ix]; row 0 is the bottom of the grid
(imaginary part -extent).
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage

from .exceptions import GridTooSmall, PreconditionError, ZeroEscaped
from .normal_form import CommutationReport, formal_commutation_check
from .series import DOUBLE_BITS, GermMap, InverseMap, TruncatedGerm, conjugate

logger = logging.getLogger(__name__)

MIN_RESOLUTION = 64
REL_SLACK = 1e-9
EXTENT_FACTOR = 1.25
DEFAULT_MAX_ITER = 10_000
CHUNK = 16_384

FOUR_CONNECTED = ndimage.generate_binary_structure(2, 1)
EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True)
class AdmissibleDomain:
    """Open disk of radius ``radius``; the germ is trusted on the disk of radius ``margin``"""
    radius: float
    margin: float

    def __post_init__(self):
        if not 0 < self.radius < self.margin:
            raise PreconditionError('0 < r < m', f'domain radius {self.radius} must be below margin {self.margin}')

    @property
    def bound(self) -> float:
        return self.radius

    def contains(self, z) -> np.ndarray:
        return np.abs(z) <= self.radius * (1 + REL_SLACK)

    def describe(self) -> Dict[str, float]:
        return {'kind': 'disk', 'radius': self.radius, 'margin': self.margin}


class ImageDomain:
    """phi(U) for a disk U; membership is |phi^-1(z)| <= r"""

    BOUNDARY_SAMPLES = 1024

    def __init__(self, phi: TruncatedGerm, base: AdmissibleDomain, mode: str = 'newton'):
        self.phi = phi
        self.base = base
        self.inverse = InverseMap(phi, mode)
        forward = GermMap(phi)
        circle = np.exp(2j * np.pi * np.arange(self.BOUNDARY_SAMPLES) / self.BOUNDARY_SAMPLES)
        self.radius = float(np.max(np.abs(forward(base.radius * circle))))
        self.margin = float(np.min(np.abs(forward(base.margin * circle))))

    @property
    def bound(self) -> float:
        return self.radius

    def contains(self, z) -> np.ndarray:
        return np.abs(self.inverse(z)) <= self.base.radius * (1 + REL_SLACK)

    def describe(self) -> Dict[str, float]:
        return {'kind': 'image', 'radius': self.base.radius, 'margin': self.base.margin,
                'bounding_radius': self.radius}


@dataclass(frozen=True)
class GridSpec:
    resolution: int
    extent: float
    max_iter: int = DEFAULT_MAX_ITER

    def __post_init__(self):
        if self.resolution < MIN_RESOLUTION:
            raise PreconditionError(f'resolution >= {MIN_RESOLUTION}', f'grid resolution {self.resolution} is too small')
        if self.extent <= 0 or self.max_iter < 1:
            raise PreconditionError('extent > 0 and max_iter >= 1')

    @classmethod
    def for_radius(cls, radius: float, resolution: int, max_iter: int = DEFAULT_MAX_ITER,
                   factor: float = EXTENT_FACTOR) -> 'GridSpec':
        return cls(resolution, factor * radius, max_iter)

    @property
    def cell(self) -> float:
        return 2 * self.extent / self.resolution

    @property
    def zero_index(self) -> Tuple[int, int]:
        return self.resolution // 2, self.resolution // 2

    def centers(self) -> np.ndarray:
        xs = -self.extent + (np.arange(self.resolution) + 0.5) * self.cell
        return xs[None, :] + 1j * xs[:, None]

    def points(self) -> np.ndarray:
        """Pixel centers, except that the pixel of 0 is evaluated at 0 itself"""
        z = self.centers()
        z[self.zero_index] = 0
        return z

    def pixel_of(self, z: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Row, column and an on-grid flag for each point"""
        ix = np.floor((np.real(z) + self.extent) / self.cell).astype(int)
        iy = np.floor((np.imag(z) + self.extent) / self.cell).astype(int)
        on_grid = (ix >= 0) & (ix < self.resolution) & (iy >= 0) & (iy < self.resolution)
        return iy, ix, on_grid


@dataclass
class EscapeField:
    """Non-escape flags; finite max_iter over-approximates the non-escaping set"""
    grid: GridSpec
    flags: np.ndarray
    iterations_used: np.ndarray
    inside: np.ndarray
    domain: Dict[str, float]
    backward_mode: str = 'series'
    grid_precision_bits: int = DOUBLE_BITS


@dataclass
class CompactApprox:
    grid: GridSpec
    mask: np.ndarray
    contact: bool
    area: float
    interior_area: float
    domain: Dict[str, float] = field(default_factory=dict)
    source: Optional[EscapeField] = None

    def points(self) -> np.ndarray:
        """Sample points of the compact: mask pixel centers (0 for the pixel of 0)"""
        return self.grid.points()[self.mask]


def _survivors(step, z: np.ndarray, domain, max_iter: int) -> Tuple[np.ndarray, np.ndarray]:
    alive = np.arange(len(z))
    steps = np.full(len(z), max_iter, dtype=np.int64)
    current = z.copy()
    for k in range(1, max_iter + 1):
        current = step(current)
        out = ~np.isfinite(current) | (np.abs(current) > domain.margin)
        out[~out] = ~domain.contains(current[~out])
        if out.any():
            steps[alive[out]] = k
            keep = ~out
            alive, current = alive[keep], current[keep]
            if not len(alive):
                break
    flags = np.zeros(len(z), dtype=bool)
    flags[alive] = True
    return flags, steps


def _bidirectional(forward, backward, z: np.ndarray, domain, max_iter: int) -> Tuple[np.ndarray, np.ndarray]:
    flags, steps = _survivors(forward, z, domain, max_iter)
    if flags.any():
        back_flags, back_steps = _survivors(backward, z[flags], domain, max_iter)
        steps[flags] = max_iter + back_steps
        flags[flags] = back_flags
    return flags, steps


def escape_field(f: TruncatedGerm, domain, grid: GridSpec, backward: str = 'series',
                 threads: int = 1) -> EscapeField:
    """
    Pixels whose orbits under f and under f^-1 stay in the closed domain for
    grid.max_iter steps each.

    Leaving the margin disk or the domain ends an orbit. Backward steps use
    InverseMap(f, backward). Work is split into fixed chunks and spread over
    ``threads`` workers; the result does not depend on scheduling.
    """
    if grid.extent < domain.bound * (1 - REL_SLACK):
        raise GridTooSmall('extent >= domain radius',
                           f'grid extent {grid.extent:.4g} does not cover the domain (radius {domain.bound:.4g})')
    if f.precision_bits > DOUBLE_BITS:
        logger.warning('grid orbits of %s run in double precision; the germ carries %d bits',
                       f.tag or 'germ', f.precision_bits)
        f = f.to_precision(DOUBLE_BITS)

    forward = GermMap(f)
    inverse = InverseMap(f, backward)
    z = grid.points()
    inside = domain.contains(z)

    flat = z[inside]
    chunks = [flat[i:i + CHUNK] for i in range(0, len(flat), CHUNK)]
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(lambda c: _bidirectional(forward, inverse, c, domain, grid.max_iter), chunks))

    flags = np.zeros(z.shape, dtype=bool)
    iterations = np.zeros(z.shape, dtype=np.int64)
    if results:
        flags[inside] = np.concatenate([r[0] for r in results])
        iterations[inside] = np.concatenate([r[1] for r in results])
    logger.info('escape field %s: %d of %d pixels survive %d steps each way',
                f.tag or 'germ', int(flags.sum()), int(inside.sum()), grid.max_iter)
    return EscapeField(grid, flags, iterations, inside, domain.describe(), backward)


def _measure(grid: GridSpec, mask: np.ndarray, inside: np.ndarray) -> Tuple[bool, float, float]:
    boundary = ndimage.binary_dilation(~inside, structure=EIGHT_CONNECTED)
    contact = bool(np.any(mask & inside & boundary))
    cell_area = grid.cell ** 2
    interior = ndimage.binary_erosion(mask, structure=EIGHT_CONNECTED, border_value=0)
    return contact, float(mask.sum() * cell_area), float(interior.sum() * cell_area)


def component_of_zero(escape: EscapeField) -> CompactApprox:
    """4-connected component of the pixel of 0, with contact and area diagnostics"""
    zero = escape.grid.zero_index
    if not escape.flags[zero]:
        raise ZeroEscaped('the pixel of 0 escaped: check the margin and the precision of the germ')
    labels, _ = ndimage.label(escape.flags, structure=FOUR_CONNECTED)
    mask = labels == labels[zero]
    contact, area, interior = _measure(escape.grid, mask, escape.inside)
    return CompactApprox(escape.grid, mask, contact, area, interior, escape.domain, escape)


def hausdorff_cells(a: np.ndarray, b: np.ndarray) -> float:
    """Hausdorff distance between two pixel sets, in cells"""
    if not a.any() or not b.any():
        return float('inf')
    to_b = ndimage.distance_transform_edt(~b)
    to_a = ndimage.distance_transform_edt(~a)
    return float(max(to_b[a].max(), to_a[b].max()))


def rasterize(points: np.ndarray, grid: GridSpec) -> Tuple[np.ndarray, int]:
    """Stamp of the pixels hit by ``points`` and the number of points off the grid"""
    iy, ix, on_grid = grid.pixel_of(points)
    stamp = np.zeros((grid.resolution, grid.resolution), dtype=bool)
    stamp[iy[on_grid], ix[on_grid]] = True
    return stamp, int((~on_grid).sum())


def image_distance(mask: np.ndarray, image: np.ndarray, grid: GridSpec) -> float:
    """
    Hausdorff distance in cells between a mask and the rasterized image of a
    point set. The mask is compared with the 1-dilated stamp; the stamp itself
    is compared with the mask.
    """
    stamp, off_grid = rasterize(image, grid)
    if off_grid:
        logger.warning('%d image points fall outside the grid', off_grid)
    if not stamp.any() or not mask.any():
        return float('inf')
    covered = ndimage.binary_dilation(stamp, structure=EIGHT_CONNECTED)
    to_image = ndimage.distance_transform_edt(~covered)
    to_mask = ndimage.distance_transform_edt(~mask)
    return float(max(to_image[mask].max(), to_mask[stamp].max()))


def invariance_check(K: CompactApprox, f: TruncatedGerm, backward: str = 'series') -> float:
    """max of d_H(K, f(K)) and d_H(K, f^-1(K)), in cells"""
    points = K.points()
    forward = image_distance(K.mask, GermMap(f.to_precision(DOUBLE_BITS))(points), K.grid)
    back = image_distance(K.mask, InverseMap(f.to_precision(DOUBLE_BITS), backward)(points), K.grid)
    logger.info('invariance of %s: forward %.2f, backward %.2f cells', f.tag or 'germ', forward, back)
    return max(forward, back)


def siegel_compact(f: TruncatedGerm, domain, grid: GridSpec, backward: str = 'series',
                   threads: int = 1) -> CompactApprox:
    return component_of_zero(escape_field(f, domain, grid, backward, threads))


@dataclass
class NestedFamily:
    radii: List[float]
    members: List[CompactApprox]
    nested: bool
    violations: List[Tuple[int, int, int]]
    gaps: List[float]


def nested_family(f: TruncatedGerm, radii: Sequence[float], grid: GridSpec, margin: Optional[float] = None,
                  threads: int = 1) -> NestedFamily:
    """
    K(U_t) for increasing disk radii on one grid; checks K_i inside the
    one-cell dilation of K_j for i < j and records the Hausdorff gap between
    consecutive members.
    """
    radii = [float(r) for r in radii]
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise PreconditionError('radii strictly increasing')
    margin = margin or 1.5 * radii[-1]
    members = [siegel_compact(f, AdmissibleDomain(r, margin), grid, threads=threads) for r in radii]

    violations = []
    for j in range(len(members)):
        grown = ndimage.binary_dilation(members[j].mask, structure=EIGHT_CONNECTED)
        for i in range(j):
            outside = int(np.sum(members[i].mask & ~grown))
            if outside:
                violations.append((i, j, outside))
    if violations:
        logger.warning('nested family violates monotonicity: %s', violations)
    gaps = [hausdorff_cells(a.mask, b.mask) for a, b in zip(members, members[1:])]
    return NestedFamily(radii, members, not violations, violations, gaps)


def pushforward_check(phi: TruncatedGerm, f: TruncatedGerm, U: AdmissibleDomain, grid: GridSpec,
                      threads: int = 1) -> float:
    """d_H(phi(K_f(U)), K_g(phi(U))) in cells, for g = phi o f o phi^-1"""
    V = ImageDomain(phi, U)
    if V.radius > grid.extent:
        raise GridTooSmall('phi(U) inside the grid',
                           f'phi(U) reaches radius {V.radius:.4g} beyond the grid extent {grid.extent:.4g}')
    K1 = siegel_compact(f, U, grid, threads=threads)
    K2 = siegel_compact(conjugate(phi, f), V, grid, threads=threads)
    return image_distance(K2.mask, GermMap(phi)(K1.points()), grid)


@dataclass
class CommonHedgehogReport:
    invariance_distance: float
    compact_distance: float
    formal: CommutationReport
    slack: float

    @property
    def common(self) -> bool:
        return self.invariance_distance <= self.slack and self.formal.commute

    @property
    def verdict(self) -> str:
        if self.common:
            return 'common hedgehog at this scale; germs commute formally'
        if not self.formal.commute:
            return f'no common hedgehog: {self.formal.verdict}'
        return f'g moves K_f by {self.invariance_distance:.1f} cells'


def common_hedgehog_check(f: TruncatedGerm, g: TruncatedGerm, U: AdmissibleDomain, grid: GridSpec,
                          slack: float = 2.0, threads: int = 1) -> CommonHedgehogReport:
    """Geometric test of g(K_f) = K_f and K_f = K_g, paired with the formal commutator"""
    Kf = siegel_compact(f, U, grid, threads=threads)
    Kg = siegel_compact(g, U, grid, threads=threads)
    moved = image_distance(Kf.mask, GermMap(g.to_precision(DOUBLE_BITS))(Kf.points()), grid)
    order = min(f.order, g.order)
    formal = formal_commutation_check(f.truncate(order), g.truncate(order))
    return CommonHedgehogReport(moved, hausdorff_cells(Kf.mask, Kg.mask), formal, slack)


@dataclass
class InteriorTrend:
    resolutions: List[int]
    areas: List[float]
    interior_areas: List[float]
    non_increasing: bool


def interior_trend(f: TruncatedGerm, U: AdmissibleDomain, resolutions: Sequence[int],
                   max_iter: int = DEFAULT_MAX_ITER, factor: float = EXTENT_FACTOR,
                   threads: int = 1) -> InteriorTrend:
    """
    Interior area of K(U) under grid refinement. Successive values may grow by
    at most a band two coarse cells wide along the boundary circle of U.
    """
    resolutions = sorted(int(n) for n in resolutions)
    areas, interiors = [], []
    for n in resolutions:
        K = siegel_compact(f, U, GridSpec.for_radius(U.radius, n, max_iter, factor), threads=threads)
        areas.append(K.area)
        interiors.append(K.interior_area)
    ok = True
    for i in range(1, len(resolutions)):
        cell = 2 * factor * U.radius / resolutions[i - 1]
        if interiors[i] > interiors[i - 1] + 2 * cell * 2 * np.pi * U.radius:
            ok = False
    return InteriorTrend(resolutions, areas, interiors, ok)


def mask_image(mask: np.ndarray) -> np.ndarray:
    """uint8 image of a mask with the imaginary axis pointing up"""
    return (mask[::-1] * 255).astype(np.uint8)


def mask_from_image(pixels: np.ndarray) -> np.ndarray:
    return (np.asarray(pixels) > 127)[::-1]


def restore(grid: GridSpec, mask: np.ndarray, domain: Dict[str, float]) -> CompactApprox:
    """CompactApprox from a stored mask, recomputing the diagnostics for a disk domain"""
    inside = np.abs(grid.centers()) <= domain['radius'] * (1 + REL_SLACK)
    inside[grid.zero_index] = True
    contact, area, interior = _measure(grid, mask, inside)
    return CompactApprox(grid, mask, contact, area, interior, domain)
