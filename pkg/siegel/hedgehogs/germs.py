"""
Named germ families and the small text formats used to describe germs,
rotation numbers and sample ranges on the command line.
"""

from typing import Dict, List, Optional, Union

import numpy as np

from .exceptions import InvalidGerm
from .rotation import DEFAULT_BITS, RotationNumber, build_liouville
from .series import DEFAULT_ORDER, DOUBLE_BITS, TruncatedGerm, compose

FAMILIES = {
    'rotation': 'lambda z',
    'quad': 'lambda z + z^2',
    'quad-squared': '(lambda z + z^2) o (lambda z + z^2)',
    'cubic': 'lambda z + z^3',
    'reduced': 'lambda z + z^N',
    'parabolic': 'z + z^2',
    'parabolic-cubic': 'z + z^3',
    'mobius': 'z / (1 - z)',
}


def make_germ(family: str, lam: complex = 1, order: int = DEFAULT_ORDER, N: Optional[int] = None,
              precision_bits: int = DOUBLE_BITS) -> TruncatedGerm:
    """Germ of a named family truncated at ``order``"""
    if family == 'rotation':
        coeffs = [lam]
    elif family in ('quad', 'quad-squared'):
        coeffs = [lam, 1]
    elif family == 'cubic':
        coeffs = [lam, 0, 1]
    elif family == 'reduced':
        if N is None or not 2 <= N <= order:
            raise InvalidGerm(f'family "reduced" needs 2 <= N <= order, got N = {N}')
        coeffs = [lam] + [0] * (N - 2) + [1]
    elif family == 'parabolic':
        coeffs = [1, 1]
    elif family == 'parabolic-cubic':
        coeffs = [1, 0, 1]
    elif family == 'mobius':
        coeffs = [1] * order
    else:
        raise InvalidGerm(f'unknown germ family {family!r}; choose from {", ".join(FAMILIES)}')

    germ = TruncatedGerm.from_coefficients(coeffs, family, precision_bits, order)
    if family == 'quad-squared':
        germ = compose(germ, germ).with_tag(family)
    return germ


def parse_coeffs(text: str) -> List[complex]:
    """'re,im;re,im;...' -> [a_1, a_2, ...]"""
    coeffs = []
    for item in text.split(';'):
        item = item.strip()
        if not item:
            continue
        parts = [p.strip() for p in item.split(',')]
        if len(parts) == 1:
            parts.append('0')
        if len(parts) != 2:
            raise ValueError(f'coefficient {item!r} is not "re,im"')
        coeffs.append(complex(float(parts[0]), float(parts[1])))
    if not coeffs:
        raise ValueError('no coefficients given')
    return coeffs


def parse_cf(text: str) -> List[int]:
    """'0,1,1,1' -> [0, 1, 1, 1]"""
    return [int(a) for a in text.replace(' ', '').split(',') if a]


def parse_options(text: str) -> Dict[str, str]:
    """'depth=4,growth=exp' -> {'depth': '4', 'growth': 'exp'}"""
    options = {}
    for item in text.split(','):
        if not item.strip():
            continue
        key, sep, value = item.partition('=')
        if not sep:
            raise ValueError(f'expected key=value, got {item!r}')
        options[key.strip()] = value.strip()
    return options


def parse_alpha(cf: Optional[str] = None, liouville: Optional[str] = None, rational: Optional[str] = None,
                precision_bits: int = DEFAULT_BITS, golden_depth: int = 24) -> RotationNumber:
    """RotationNumber from one of the three command-line forms; golden mean by default"""
    given = [x for x in (cf, liouville, rational) if x]
    if len(given) > 1:
        raise ValueError('give at most one of --alpha-cf, --alpha-liouville, --alpha-rational')
    if cf:
        return RotationNumber(tuple(parse_cf(cf)), precision_bits)
    if liouville:
        options = parse_options(liouville)
        seed = tuple(int(a) for a in options.get('seed', '1').split('/'))
        return build_liouville(int(options.get('depth', 4)), options.get('growth', 'exp'), seed,
                               int(options.get('cap', 2000)), precision_bits)
    if rational:
        p, _, q = rational.partition('/')
        return RotationNumber.from_rational(int(p), int(q), precision_bits)
    return RotationNumber.golden(golden_depth, precision_bits)


def parse_range(text: Union[str, int, float, list], integer: bool = False) -> List[Union[int, float]]:
    """
    Ordered sample list.

        '0.1:0.01:8'   8 values from 0.1 to 0.01, geometrically spaced
        '50:500:10'    10 integers from 50 to 500, linearly spaced (integer=True)
        '0.1,0.05'     explicit list
        '5'            single value
    """
    cast = int if integer else float
    if isinstance(text, (int, float)):
        return [cast(text)]
    if isinstance(text, list):
        return [cast(v) for v in text]
    text = text.strip()
    if ':' in text:
        start, stop, count = text.split(':')
        count = int(count)
        if count < 1:
            raise ValueError(f'range {text!r} needs a positive count')
        if integer:
            values = np.rint(np.linspace(int(start), int(stop), count)).astype(int)
            return list(dict.fromkeys(int(v) for v in values))
        start, stop = float(start), float(stop)
        if start <= 0 or stop <= 0:
            raise ValueError(f'geometric range {text!r} needs positive endpoints')
        return [float(v) for v in np.geomspace(start, stop, count)]
    return [cast(v) for v in text.split(',') if v.strip()]
