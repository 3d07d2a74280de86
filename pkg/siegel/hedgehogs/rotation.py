"""
Continued-fraction arithmetic for rotation numbers.

Convergents are kept as exact Python integers; the value of alpha and the
multiplier e^{2 pi i alpha} are evaluated with mpmath at a stated precision.
"""

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import List, Optional, Sequence, Tuple

import numpy as np
from mpmath import mp, mpf

from .exceptions import BoundViolation, DepthExceeded, InvalidContinuedFraction, PreconditionError

logger = logging.getLogger(__name__)

DEFAULT_BITS = 128
NET_OVERSAMPLING = 16
TAILS = ('golden', 'rational')


def convergents(pq: Sequence[int]) -> List[Tuple[int, int]]:
    """
    Convergents (p_k, q_k) of [a_0; a_1, a_2, ...] for k = 0..K.

    Uses (p_-1, q_-1) = (1, 0) and (p_0, q_0) = (a_0, 1).
    """
    if not pq:
        raise InvalidContinuedFraction('empty partial quotient list')
    if any(int(a) != a or a < 1 for a in pq[1:]):
        raise InvalidContinuedFraction(f'partial quotients beyond a_0 must be positive integers: {list(pq)}')
    p_prev, q_prev = 1, 0
    p, q = int(pq[0]), 1
    result = [(p, q)]
    for a in pq[1:]:
        a = int(a)
        p, p_prev = a * p + p_prev, p
        q, q_prev = a * q + q_prev, q
        result.append((p, q))
    return result


@dataclass(frozen=True)
class RotationNumber:
    """
    alpha = [0; a_1, ..., a_K] followed by a tail.

    With ``tail='golden'`` alpha = [0; a_1, ..., a_K, 1, 1, 1, ...] is irrational
    and its first K convergents are the stored ones; ``tail='rational'`` makes
    alpha = p_K / q_K exactly.
    """
    pq: Tuple[int, ...]
    precision_bits: int = DEFAULT_BITS
    tail: str = 'golden'
    capped: Tuple[int, ...] = ()

    def __post_init__(self):
        if len(self.pq) < 2 or self.pq[0] != 0:
            raise InvalidContinuedFraction(f'expected [0, a_1, ...], got {list(self.pq)}')
        if self.tail not in TAILS:
            raise InvalidContinuedFraction(f'unknown tail {self.tail!r}')
        convergents(self.pq)

    @classmethod
    def golden(cls, depth: int = 24, precision_bits: int = DEFAULT_BITS) -> 'RotationNumber':
        return cls((0,) + (1,) * depth, precision_bits)

    @classmethod
    def from_rational(cls, p: int, q: int, precision_bits: int = DEFAULT_BITS) -> 'RotationNumber':
        """Continued fraction of p/q in (0, 1) by the Euclidean algorithm"""
        if not 0 < p < q:
            raise InvalidContinuedFraction(f'{p}/{q} is not in (0, 1)')
        quotients = [0]
        num, den = q, p
        while den:
            quotients.append(num // den)
            num, den = den, num % den
        return cls(tuple(quotients), precision_bits, 'rational')

    @property
    def depth(self) -> int:
        return len(self.pq) - 1

    @cached_property
    def convergents(self) -> List[Tuple[int, int]]:
        return convergents(self.pq)

    def q(self, k: int) -> int:
        if k > self.depth:
            raise DepthExceeded(k, self.depth)
        return self.convergents[k][1]

    def alpha(self, bits: Optional[int] = None) -> mpf:
        """alpha evaluated at ``bits`` of precision (default: the stored precision)"""
        with mp.workprec(bits or self.precision_bits):
            if self.tail == 'rational':
                p, q = self.convergents[-1]
                return mpf(p) / q
            x = (1 + mp.sqrt(5)) / 2
            for a in reversed(self.pq[1:]):
                x = a + 1 / x
            return 1 / x

    @cached_property
    def value(self) -> mpf:
        return self.alpha()

    def multiplier(self, bits: Optional[int] = None):
        """e^{2 pi i alpha}; a Python complex at 53 bits or fewer, mpc otherwise"""
        bits = bits or self.precision_bits
        work = max(bits, self.precision_bits)
        with mp.workprec(work):
            lam = mp.expj(2 * mp.pi * self.alpha(work))
        if bits <= 53:
            return complex(lam)
        with mp.workprec(bits):
            return +lam

    def multiplier_power(self, k: int, bits: Optional[int] = None):
        """e^{2 pi i k alpha} with the fractional part of k alpha taken at full precision"""
        bits = bits or self.precision_bits
        extra = max(int(abs(k)).bit_length(), 1)
        with mp.workprec(self.precision_bits + extra):
            turns = k * self.alpha(self.precision_bits + extra)
            turns -= mp.floor(turns)
            lam = mp.expj(2 * mp.pi * turns)
        if bits <= 53:
            return complex(lam)
        with mp.workprec(bits):
            return +lam

    def check_invariants(self) -> List[str]:
        """Violations of the convergent identities; empty when everything holds"""
        problems = []
        conv = [(1, 0)] + self.convergents
        for k in range(1, len(conv) - 1):
            (p0, q0), (p1, q1), (p2, q2) = conv[k - 1], conv[k], conv[k + 1]
            a = self.pq[k]
            if (p2, q2) != (a * p1 + p0, a * q1 + q0):
                problems.append(f'recursion fails at k = {k}')
            if p2 * q1 - p1 * q2 != (-1) ** (k + 1):
                problems.append(f'determinant identity fails at k = {k}')
        with mp.workprec(self.precision_bits):
            alpha = self.value
            for k in range(self.depth):
                p, q = self.convergents[k]
                q_next = self.convergents[k + 1][1]
                if not abs(alpha - mpf(p) / q) < mpf(1) / (q * q_next):
                    problems.append(f'approximation bound fails at k = {k}')
        return problems

    def __str__(self):
        head = ','.join(str(a) for a in self.pq[:8])
        return f'[{head}{",..." if len(self.pq) > 8 else ""}] ({self.tail}, {self.precision_bits} bits)'


def brjuno_sums(r: RotationNumber, K: int) -> List[float]:
    """Partial sums B_1 .. B_K of sum_{k<K} log(q_{k+1}) / q_k"""
    if K > r.depth:
        raise DepthExceeded(K, r.depth)
    total = 0.0
    sums = []
    for k in range(K):
        q, q_next = r.convergents[k][1], r.convergents[k + 1][1]
        total += math.log(q_next) / q
        sums.append(total)
    return sums


def brjuno_sum(r: RotationNumber, K: int) -> float:
    return brjuno_sums(r, K)[-1] if K > 0 else 0.0


def _ceil_exp(x: int) -> int:
    with mp.workprec(int(1.45 * x) + 64):
        return int(mp.ceil(mp.exp(x)))


def build_liouville(depth: int, growth: str = 'exp', seed: Sequence[int] = (1,),
                    cap: int = 2000, precision_bits: int = DEFAULT_BITS) -> RotationNumber:
    """
    Liouville-type rotation number with a_{k+1} >= exp(q_k) or q_k^{q_k}.

    ``seed`` fixes the leading quotients. A required quotient larger than
    exp(cap) is replaced by ceil(exp(cap)) and its index is recorded in
    ``capped``.
    """
    if depth < 2:
        raise PreconditionError('depth >= 2', f'Liouville construction needs depth >= 2, got {depth}')
    if growth not in ('exp', 'tower'):
        raise InvalidContinuedFraction(f'unknown growth {growth!r}')
    pq = [0] + [int(a) for a in seed][:depth]
    capped = []
    while len(pq) - 1 < depth:
        q = convergents(pq)[-1][1]
        size = q if growth == 'exp' else q * math.log(q) if q > 1 else 0.0
        if size > cap:
            a = _ceil_exp(cap)
            capped.append(len(pq))
        elif growth == 'exp':
            a = _ceil_exp(q)
        else:
            a = q ** q
        pq.append(max(a, 1))
    if capped:
        logger.info('Liouville quotients capped at exp(%d) for indices %s', cap, capped)
    return RotationNumber(tuple(pq), precision_bits, 'golden', tuple(capped))


def orbit_turns(r: RotationNumber, count: int) -> np.ndarray:
    """Fractional parts of m alpha for m = 0 .. count, reduced at full precision"""
    with mp.workprec(r.precision_bits + max(count, 1).bit_length()):
        alpha = r.value
        return np.array([float(m * alpha - mp.floor(m * alpha)) for m in range(count + 1)])


def rotation_net_gap(r: RotationNumber, k: int, w: complex) -> float:
    """
    Largest distance from a point of the circle |z| = |w| to the orbit
    w, R(w), ..., R^{q_k}(w) of the rotation by alpha.

    The circle is sampled at 16 q_k points starting at arg(w). Raises
    BoundViolation when the gap exceeds 4 pi |w| / q_k.
    """
    radius = abs(w)
    if radius == 0:
        raise PreconditionError('|w| > 0', 'rotation net needs a nonzero base point')
    q = r.q(k)
    orbit = np.sort(np.mod(orbit_turns(r, q), 1.0))
    samples = np.arange(NET_OVERSAMPLING * q) / (NET_OVERSAMPLING * q)

    extended = np.concatenate([orbit - 1.0, orbit, orbit + 1.0])
    idx = np.searchsorted(extended, samples)
    nearest = np.minimum(np.abs(extended[idx] - samples), np.abs(samples - extended[idx - 1]))
    gap = float(np.max(2 * radius * np.sin(np.pi * nearest)))

    ceiling = 4 * np.pi * radius / q
    logger.debug('net gap k=%d q=%d: %.6g (ceiling %.6g)', k, q, gap, ceiling)
    if gap > ceiling * (1 + 1e-12):
        raise BoundViolation(f'net gap {gap:.6g} exceeds 4 pi |w| / q_k = {ceiling:.6g}')
    return gap
