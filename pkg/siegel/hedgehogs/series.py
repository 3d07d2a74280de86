"""
Truncated power-series algebra of holomorphic germs fixing 0.

A germ f(z) = a_1 z + a_2 z^2 + ... + a_N z^N is stored through its truncation
order N. Internally coefficients live in arrays indexed by power (index 0 is the
constant term, always zero). Hardware doubles use numpy complex128 arrays;
extended precision uses object arrays of mpmath ``mpc`` evaluated under
``mp.workprec``.
"""

import logging
from contextlib import nullcontext
from dataclasses import dataclass, replace
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from mpmath import mp, mpc

from .exceptions import InvalidGerm, NotTangentToIdentity

logger = logging.getLogger(__name__)

DOUBLE_BITS = 53
DEFAULT_ORDER = 20
DEFAULT_TOL = 1e-9

Number = Union[complex, mpc]


def precision(bits: int):
    """Context in which mpmath arithmetic runs at ``bits`` of precision"""
    if bits <= DOUBLE_BITS:
        return nullcontext()
    return mp.workprec(bits)


def _zeros(n: int, bits: int) -> np.ndarray:
    if bits <= DOUBLE_BITS:
        return np.zeros(n, dtype=complex)
    return np.array([mpc(0)] * n, dtype=object)


def _convert(values: Sequence[Number], bits: int) -> np.ndarray:
    if bits <= DOUBLE_BITS:
        return np.array([complex(v) for v in values], dtype=complex)
    return np.array([mpc(v) for v in values], dtype=object)


def _mul(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    """Coefficients 0..n of the product of two coefficient arrays"""
    if a.dtype != object:
        return np.convolve(a[:n + 1], b[:n + 1])[:n + 1]
    out = np.empty(n + 1, dtype=object)
    for k in range(n + 1):
        out[k] = np.dot(a[:k + 1], b[k::-1])
    return out


def _top(a: np.ndarray) -> int:
    """Index of the highest nonzero coefficient"""
    nonzero = [k for k in range(len(a) - 1, 0, -1) if a[k] != 0]
    return nonzero[0] if nonzero else 1


@dataclass(frozen=True)
class TruncatedGerm:
    """Degree-N truncation of f(z) = a_1 z + ... + a_N z^N with a_1 != 0"""
    order: int
    coeffs: Tuple[Number, ...]
    tag: str = ''
    precision_bits: int = DOUBLE_BITS

    def __post_init__(self):
        if self.order < 2:
            raise InvalidGerm(f'truncation order must be >= 2, got {self.order}')
        if len(self.coeffs) != self.order:
            raise InvalidGerm(f'expected {self.order} coefficients, got {len(self.coeffs)}')
        if self.coeffs[0] == 0:
            raise InvalidGerm('a_1 = 0: not a germ of diffeomorphism')

    @classmethod
    def from_array(cls, array: np.ndarray, order: int, tag: str = '',
                   precision_bits: int = DOUBLE_BITS) -> 'TruncatedGerm':
        """Build from a power-indexed array (index 0 ignored)"""
        values = list(array[1:order + 1])
        values += [0] * (order - len(values))
        with precision(precision_bits):
            coeffs = tuple(_convert(values, precision_bits))
        if precision_bits <= DOUBLE_BITS:
            coeffs = tuple(complex(c) for c in coeffs)
        return cls(order, coeffs, tag, precision_bits)

    @classmethod
    def from_coefficients(cls, coeffs: Sequence[Number], tag: str = '',
                          precision_bits: int = DOUBLE_BITS,
                          order: Optional[int] = None) -> 'TruncatedGerm':
        """Build from a_1, a_2, ...; padded with zeros up to ``order``"""
        order = order or len(coeffs)
        return cls.from_array(np.array([0] + list(coeffs), dtype=object), order, tag, precision_bits)

    @property
    def multiplier(self) -> Number:
        return self.coeffs[0]

    def coefficient(self, k: int) -> Number:
        """Coefficient a_k (zero beyond the truncation order)"""
        if k < 1 or k > self.order:
            return 0
        return self.coeffs[k - 1]

    def array(self, order: Optional[int] = None, bits: Optional[int] = None) -> np.ndarray:
        order = self.order if order is None else order
        bits = self.precision_bits if bits is None else bits
        values = [0] + list(self.coeffs[:order]) + [0] * max(0, order - self.order)
        with precision(bits):
            return _convert(values, bits)

    def truncate(self, order: int) -> 'TruncatedGerm':
        if order > self.order:
            raise InvalidGerm(f'cannot extend order {self.order} to {order}')
        return replace(self, order=order, coeffs=self.coeffs[:order])

    def to_precision(self, bits: int) -> 'TruncatedGerm':
        return TruncatedGerm.from_array(self.array(bits=bits), self.order, self.tag, bits)

    def with_tag(self, tag: str) -> 'TruncatedGerm':
        return replace(self, tag=tag)

    def __str__(self):
        return f'TruncatedGerm({self.tag or "anonymous"}, N={self.order}, a_1={complex(self.multiplier):.6g})'


def identity(order: int = DEFAULT_ORDER, precision_bits: int = DOUBLE_BITS) -> TruncatedGerm:
    return TruncatedGerm.from_coefficients([1], 'identity', precision_bits, order)


def rotation(lam: Number, order: int = DEFAULT_ORDER, precision_bits: int = DOUBLE_BITS) -> TruncatedGerm:
    return TruncatedGerm.from_coefficients([lam], 'rotation', precision_bits, order)


def random_germ(rng: np.random.Generator, order: int = DEFAULT_ORDER, bound: float = 1.0,
                multiplier: Optional[complex] = None) -> TruncatedGerm:
    """Germ with unit multiplier and coefficients uniform in the disk of radius ``bound``"""
    lam = multiplier if multiplier is not None else np.exp(2j * np.pi * rng.random())
    radius = bound * np.sqrt(rng.random(order - 1))
    angle = 2 * np.pi * rng.random(order - 1)
    return TruncatedGerm.from_coefficients([lam] + list(radius * np.exp(1j * angle)), 'random')


def _common(f: TruncatedGerm, g: TruncatedGerm) -> Tuple[int, int]:
    return min(f.order, g.order), min(f.precision_bits, g.precision_bits)


def compose(f: TruncatedGerm, g: TruncatedGerm) -> TruncatedGerm:
    """Coefficients of f(g(z)) through min(order(f), order(g)), by Horner's scheme"""
    n, bits = _common(f, g)
    with precision(bits):
        a = f.array(n, bits)
        b = g.array(n, bits)
        top = _top(a)
        h = _zeros(n + 1, bits)
        h[0] = a[top]
        for k in range(top - 1, 0, -1):
            h = _mul(h, b, n)
            h[0] = h[0] + a[k]
        h = _mul(h, b, n)
    return TruncatedGerm.from_array(h, n, f'{f.tag}o{g.tag}' if f.tag or g.tag else '', bits)


def power(f: TruncatedGerm, n: int) -> TruncatedGerm:
    """n-fold composition f o ... o f (n >= 0)"""
    result = identity(f.order, f.precision_bits)
    for _ in range(n):
        result = compose(f, result)
    return result.with_tag(f'{f.tag}^{n}')


class PowerTable:
    """Powers s^j of a series whose coefficients are fixed one degree at a time"""

    def __init__(self, weights: np.ndarray, n: int, bits: int):
        self.weights = weights
        self.s = _zeros(n + 1, bits)
        self.powers = {1: self.s}
        for j in range(2, n + 1):
            self.powers[j] = _zeros(n + 1, bits)

    def weighted_sum(self, k: int) -> Number:
        """Sum over j >= 2 of weights_j [s^j]_k; needs s_1 .. s_{k-1} only"""
        total = 0
        for j in range(2, k + 1):
            below = self.powers[j - 1]
            self.powers[j][k] = np.dot(self.s[1:k - j + 2], below[k - 1:j - 2:-1])
            if self.weights[j] != 0:
                total = total + self.weights[j] * self.powers[j][k]
        return total


def invert(f: TruncatedGerm) -> TruncatedGerm:
    """Compositional inverse to the truncation order, solved degree by degree"""
    n, bits = f.order, f.precision_bits
    with precision(bits):
        a = f.array()
        table = PowerTable(a, n, bits)
        table.s[1] = 1 / a[1]
        for k in range(2, n + 1):
            table.s[k] = -table.weighted_sum(k) / a[1]
        g = table.s.copy()
    return TruncatedGerm.from_array(g, n, f'{f.tag}^-1' if f.tag else '', bits)


def conjugate(phi: TruncatedGerm, f: TruncatedGerm) -> TruncatedGerm:
    """phi o f o phi^-1"""
    return compose(phi, compose(f, invert(phi)))


def commutator(f: TruncatedGerm, g: TruncatedGerm) -> TruncatedGerm:
    """f o g o f^-1 o g^-1"""
    return compose(compose(f, g), compose(invert(f), invert(g))).with_tag(f'[{f.tag},{g.tag}]')


@dataclass(frozen=True)
class Tangency:
    """Outcome of tangency_order; ``degree is None`` means identity to order N"""
    degree: Optional[int]
    coefficient: complex

    @property
    def is_identity(self) -> bool:
        return self.degree is None


def tangency_order(g: TruncatedGerm, tol: float = DEFAULT_TOL) -> Tangency:
    """Smallest d with |a_{d+1}| > tol for a germ tangent to the identity"""
    if abs(complex(g.multiplier) - 1) > tol:
        raise NotTangentToIdentity(complex(g.multiplier), tol)
    for k in range(2, g.order + 1):
        c = complex(g.coefficient(k))
        if abs(c) > tol:
            return Tangency(k - 1, c)
    return Tangency(None, 0j)


def coefficient_distance(f: TruncatedGerm, g: TruncatedGerm, start: int = 1) -> float:
    """Largest |a_k(f) - a_k(g)| over the common order, from degree ``start``"""
    n = min(f.order, g.order)
    return max((abs(complex(f.coefficient(k)) - complex(g.coefficient(k))) for k in range(start, n + 1)),
               default=0.0)


def derivative(f: TruncatedGerm) -> np.ndarray:
    """Coefficients of f' indexed by power: [a_1, 2 a_2, ..., N a_N]"""
    a = f.array()
    with precision(f.precision_bits):
        return np.array([k * a[k] for k in range(1, f.order + 1)], dtype=a.dtype)


class GermMap:
    """Horner evaluation of a truncated germ on scalars or numpy arrays"""

    def __init__(self, f: TruncatedGerm):
        self.germ = f
        self.extended = f.precision_bits > DOUBLE_BITS
        a = f.array()
        self.top = _top(a)
        coeffs = list(a[1:self.top + 1])
        if not self.extended:
            coeffs = [complex(c) for c in coeffs]
        self.coeffs = coeffs
        self.dcoeffs = list(derivative(f)[:self.top])
        if not self.extended:
            self.dcoeffs = [complex(c) for c in self.dcoeffs]

    def _horner(self, coeffs: list, z):
        acc = coeffs[-1]
        for c in coeffs[-2::-1]:
            acc = acc * z + c
        return acc

    def _extended(self, coeffs: list, z, power: int):
        """z^power times the Horner sum, at the germ's precision; arrays give object arrays of mpc"""
        with precision(self.germ.precision_bits):
            if np.ndim(z):
                z = np.asarray(z)
                out = [self._horner(coeffs, mpc(v)) * mpc(v) ** power for v in z.ravel()]
                return np.array(out, dtype=object).reshape(z.shape)
            z = mpc(z)
            return self._horner(coeffs, z) * z ** power

    def __call__(self, z):
        if self.extended:
            return self._extended(self.coeffs, z, 1)
        return self._horner(self.coeffs, z) * z

    def derivative(self, z):
        if self.extended:
            return self._extended(self.dcoeffs, z, 0)
        return self._horner(self.dcoeffs, z)

    def remainder(self, z):
        """f(z) - a_1 z, summed without the linear term so nothing cancels"""
        if self.top < 2:
            return z * 0
        if self.extended:
            return self._extended(self.coeffs[1:], z, 2)
        return self._horner(self.coeffs[1:], z) * z * z


def evaluate(f: TruncatedGerm, z):
    """Value of the truncated polynomial at z (scalar or array)"""
    return GermMap(f)(z)


class InverseMap:
    """
    Evaluates f^-1 near 0.

    ``series`` evaluates the truncated compositional inverse as a polynomial;
    ``newton`` polishes that guess with Newton steps on f(w) = z.
    """

    MODES = ('series', 'newton')

    def __init__(self, f: TruncatedGerm, mode: str = 'series', newton_steps: int = 2):
        if mode not in self.MODES:
            raise ValueError(f'unknown inverse mode {mode!r}')
        self.mode = mode
        self.newton_steps = newton_steps
        self.forward = GermMap(f)
        self.series = GermMap(invert(f))

    def __call__(self, z):
        w = self.series(z)
        if self.mode == 'newton':
            for _ in range(self.newton_steps):
                w = w - (self.forward(w) - z) / self.forward.derivative(w)
        return w


def series_log1p(u: np.ndarray, n: int) -> np.ndarray:
    """log(1 + u) for a complex coefficient array with u[0] = 0, through degree n"""
    out = np.zeros(n + 1, dtype=complex)
    term = np.zeros(n + 1, dtype=complex)
    term[0] = 1
    for m in range(1, n + 1):
        term = _mul(term, u, n)
        if not term.any():
            break
        out += (-1) ** (m + 1) * term / m
    return out


def series_exp(x: np.ndarray, n: int) -> np.ndarray:
    """exp(x) for a complex coefficient array with x[0] = 0, through degree n"""
    out = np.zeros(n + 1, dtype=complex)
    out[0] = 1
    term = out.copy()
    for m in range(1, n + 1):
        term = _mul(term, x, n) / m
        if not term.any():
            break
        out += term
    return out
