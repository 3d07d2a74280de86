"""
Services behind the management commands: building germs and grids from an
experiment config, writing reports, and exporting compact approximations.
"""

import csv
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional

import numpy as np
from matplotlib import colormaps
from PIL import Image

from .compacta import (AdmissibleDomain, CompactApprox, EscapeField, GridSpec, mask_from_image, mask_image,
                       restore)
from .exceptions import MissingCompact, PreconditionError
from .germs import make_germ, parse_alpha, parse_coeffs, parse_range
from .rotation import DEFAULT_BITS, RotationNumber
from .serializers import CompactSidecarSerializer, GermSerializer
from .series import TruncatedGerm

logger = logging.getLogger(__name__)

CSV_COLUMNS = ('r', 'M', 'error_k', 'ceilings', 'pass')
HEATMAP_COLORMAP = 'magma'
DEFAULT_MARGIN_FACTOR = 1.5


def dump_json(payload: Dict[str, Any]) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + '\n'


def load_germ(path: str) -> TruncatedGerm:
    """TruncatedGerm from a GermSerializer JSON document"""
    with open(path) as handle:
        data = json.load(handle)
    serializer = GermSerializer(data=data)
    serializer.is_valid(raise_exception=True)
    return serializer.save()


class ExperimentBuilder:
    """Library objects described by a validated experiment config"""

    def __init__(self, config: Dict[str, Any]):
        self.config = config

    def alpha(self) -> RotationNumber:
        c = self.config
        bits = max(c['precision_bits'], DEFAULT_BITS)
        return parse_alpha(c.get('alpha_cf'), c.get('alpha_liouville'), c.get('alpha_rational'), bits,
                           c.get('golden_depth', 24))

    def germ(self, key: str = 'germ', default: str = 'quad', bits: Optional[int] = None) -> TruncatedGerm:
        """
        Germ named by ``key``. For the main germ an explicit --coeffs list or
        --germ-file wins over the family name; lambda comes from the alpha flags.
        """
        c = self.config
        bits = bits or c['precision_bits']
        if key == 'germ' and c.get('coeffs'):
            coeffs = parse_coeffs(c['coeffs'])
            return TruncatedGerm.from_coefficients(coeffs, 'coeffs', bits, max(c['order'], len(coeffs), 2))
        if key == 'germ' and c.get('germ_file'):
            germ = load_germ(c['germ_file'])
            logger.info('loaded germ %s (order %d) from %s', germ.tag or 'germ', germ.order, c['germ_file'])
            return germ
        family = c.get(key) or default
        lam = self.alpha().multiplier(bits)
        return make_germ(family, lam, c['order'], c.get('exponent') or c.get('N'), bits)

    def domain(self) -> AdmissibleDomain:
        radius = self.config['radius']
        return AdmissibleDomain(radius, self.config.get('margin') or DEFAULT_MARGIN_FACTOR * radius)

    def grid(self) -> GridSpec:
        c = self.config
        return GridSpec.for_radius(c['radius'], c['resolution'], c['max_iter'], c['extent_factor'])

    def values(self, key: str, default: str, integer: bool = False) -> List:
        return parse_range(self.config.get(key) or default, integer)


class ReportWriter:
    """JSON and CSV reports; each JSON document echoes the config under "config" """

    def __init__(self, config: Dict[str, Any]):
        self.config = config

    def _prepare(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        return path

    def write_json(self, path, payload: Dict[str, Any]) -> Path:
        path = self._prepare(path)
        document = dict(payload)
        document['config'] = self.config
        path.write_text(dump_json(document))
        logger.info('wrote %s', path)
        return path

    def write_csv(self, path, samples: Iterable[Dict[str, Any]]) -> Path:
        path = self._prepare(path)
        with open(path, 'w', newline='') as handle:
            writer = csv.writer(handle)
            writer.writerow(CSV_COLUMNS)
            for row in samples:
                writer.writerow([row['r'], row['M'], row['error_k'], row['ceiling'], row['pass']])
        logger.info('wrote %s', path)
        return path

    def write_verification(self, path, payload: Dict[str, Any]) -> List[Path]:
        path = Path(path)
        written = [self.write_json(path, payload)]
        if 'samples' in payload:
            written.append(self.write_csv(path.with_suffix('.csv'), payload['samples']))
        return written


class CompactRenderer:
    """PPM exports of a compact approximation plus its JSON sidecar"""

    def __init__(self, compact: CompactApprox, escape: Optional[EscapeField] = None):
        self.compact = compact
        self.escape = escape or compact.source

    def heatmap(self) -> np.ndarray:
        """RGB image of iterations_used on a log scale"""
        iterations = self.escape.iterations_used.astype(float)
        top = np.log1p(2 * self.compact.grid.max_iter)
        colors = colormaps[HEATMAP_COLORMAP](np.log1p(iterations) / top)
        return (colors[::-1, :, :3] * 255).astype(np.uint8)

    def write(self, out, germ: TruncatedGerm, config: Dict[str, Any], heatmap: bool = False) -> Path:
        out = Path(out)
        out.parent.mkdir(parents=True, exist_ok=True)
        Image.fromarray(mask_image(self.compact.mask)).save(out, format='PPM')
        heat_name = None
        if heatmap:
            heat_path = out.with_name(f'{out.stem}.heat.ppm')
            Image.fromarray(self.heatmap()).save(heat_path, format='PPM')
            heat_name = heat_path.name

        grid = self.compact.grid
        sidecar = {
            'radius': self.compact.domain.get('radius'),
            'resolution': grid.resolution,
            'max_iter': grid.max_iter,
            'extent': grid.extent,
            'area': self.compact.area,
            'interior_area': self.compact.interior_area,
            'contact': self.compact.contact,
            'mask': out.name,
            'heatmap': heat_name,
            'domain': self.compact.domain,
            'backward_mode': self.escape.backward_mode if self.escape else 'series',
            'grid_precision_bits': self.escape.grid_precision_bits if self.escape else 53,
            'germ': germ,
            'config': config,
        }
        path = out.with_suffix('.json')
        path.write_text(dump_json(CompactSidecarSerializer(sidecar).data))
        logger.info('wrote %s and %s', out, path)
        return path


class LoadedCompact:
    def __init__(self, compact: CompactApprox, germ: Optional[TruncatedGerm], config: Dict[str, Any]):
        self.compact = compact
        self.germ = germ
        self.config = config


def load_compact(sidecar: Optional[str]) -> LoadedCompact:
    """CompactApprox restored from a render sidecar and its mask image"""
    if not sidecar or not Path(sidecar).is_file():
        raise MissingCompact()
    path = Path(sidecar)
    serializer = CompactSidecarSerializer(data=json.loads(path.read_text()))
    serializer.is_valid(raise_exception=True)
    data = serializer.validated_data

    mask_path = path.parent / data['mask']
    if not mask_path.is_file():
        raise MissingCompact()
    with Image.open(mask_path) as image:
        mask = mask_from_image(np.asarray(image.convert('L')))
    grid = GridSpec(data['resolution'], data['extent'], data['max_iter'])
    if mask.shape != (grid.resolution, grid.resolution):
        raise PreconditionError('mask matches the sidecar resolution',
                                f'{mask_path} is {mask.shape[1]}x{mask.shape[0]}, sidecar says {grid.resolution}')
    compact = restore(grid, mask, data['domain'])
    germ = GermSerializer().create(data['germ']) if 'germ' in data else None
    logger.info('loaded compact %s: area %.4g, contact %s', mask_path, compact.area, compact.contact)
    return LoadedCompact(compact, germ, data.get('config', {}))
