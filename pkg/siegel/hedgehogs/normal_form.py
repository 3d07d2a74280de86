"""
Small-divisor recursions: reduction of a germ to rotation-tangency of a given
order, formal linearization and the formal commutation checks.

Everything here works on truncations. A successful recursion shows that the
germ is formally conjugate to lambda z up to the stated order; it says
nothing about convergence of the conjugacy.
"""

import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import List, Optional, Sequence

from .exceptions import DivisorUnderflow, OrderMismatch, PreconditionError, ResonantMultiplier
from .series import (
    DEFAULT_TOL, PowerTable, Tangency, TruncatedGerm, commutator, compose, conjugate, invert,
    precision, tangency_order,
)

logger = logging.getLogger(__name__)

FORMAL_NOTE = (
    'formal result to the truncation order only; it says nothing about convergence '
    'of the conjugacy (linearizability is not decidable from truncations)'
)


# formal checks run at no less than this precision; the inverse series of a
# germ like lambda z + z^2 has coefficients growing like 4^k
FORMAL_BITS = 128


def _formal(f: TruncatedGerm) -> TruncatedGerm:
    return f if f.precision_bits >= FORMAL_BITS else f.to_precision(FORMAL_BITS)


def resonance_tolerance(bits: int) -> float:
    return 2.0 ** -(bits - 13)


def divisor_floor(bits: int) -> float:
    return 2.0 ** -(bits / 2)


@dataclass
class NormalFormResult:
    """Conjugacy phi and the germ phi^-1 o f o phi = lambda z + O(z^order_achieved)"""
    phi: TruncatedGerm
    reduced: TruncatedGerm
    small_divisors: List[float]
    order_achieved: int
    residual: float
    tol: float = DEFAULT_TOL
    note: str = FORMAL_NOTE

    @property
    def verified(self) -> bool:
        return self.residual < self.tol


def _check_multiplier(lam, N: int, bits: int, tol: float):
    if abs(abs(complex(lam)) - 1) > tol:
        raise PreconditionError('|a_1| = 1', f'multiplier {complex(lam)} is not on the unit circle')
    limit = resonance_tolerance(bits)
    power = lam
    for k in range(1, N + 1):
        distance = float(abs(power - 1))
        if distance < limit:
            raise ResonantMultiplier(k, distance)
        power = power * lam


def _reduce(f: TruncatedGerm, N: int, tol: float) -> NormalFormResult:
    bits = f.precision_bits
    top = N - 1
    with precision(bits):
        a = f.array()
        lam = a[1]
        _check_multiplier(lam, N, bits, tol)
        floor = divisor_floor(bits)

        table = PowerTable(a, top, bits)
        table.s[1] = 1
        divisors = []
        lam_k = lam
        for k in range(2, top + 1):
            lam_k = lam_k * lam
            divisor = lam_k - lam
            size = float(abs(divisor))
            if size < floor:
                raise DivisorUnderflow(k, size, bits)
            divisors.append(size)
            table.s[k] = table.weighted_sum(k) / divisor
        coeffs = list(table.s[1:top + 1])

    phi = TruncatedGerm.from_coefficients(coeffs, 'normal-form-phi', bits, f.order)
    reduced = compose(invert(phi), compose(f, phi)).with_tag('normal-form')
    residual = max((abs(complex(reduced.coefficient(k))) for k in range(2, min(N, reduced.order + 1))), default=0.0)
    if residual >= tol:
        logger.warning('reduction of %s to order %d left residual %.3e (tol %.1e)', f.tag or 'germ', N, residual, tol)
    if divisors:
        logger.debug('smallest divisor %.3e at k = %d', min(divisors), 2 + divisors.index(min(divisors)))
    return NormalFormResult(phi, reduced, divisors, N, residual, tol)


def reduce_to_order(f: TruncatedGerm, N: int, tol: float = DEFAULT_TOL) -> NormalFormResult:
    """
    Polynomial phi of degree < N with phi^-1 o f o phi = lambda z + O(z^N).

    Coefficient h_k of phi solves h_k (lambda^k - lambda) = [f o phi]_k minus
    the linear term, for k = 2 .. N-1. Raises ResonantMultiplier when lambda is
    numerically a root of unity of order <= N and DivisorUnderflow when a
    divisor falls below 2^(-bits/2); retrying with more bits is up to the caller.
    """
    if N > f.order:
        raise PreconditionError('N <= order(f)', f'cannot reduce to order {N} a germ truncated at {f.order}')
    if N < 2:
        raise PreconditionError('N >= 2', f'reduction order must be >= 2, got {N}')
    return _reduce(f, N, tol)


def linearize(f: TruncatedGerm, tol: float = DEFAULT_TOL) -> NormalFormResult:
    """Formal linearization through the full truncation order of f"""
    return _reduce(f, f.order + 1, tol)


@dataclass
class CommutationReport:
    order: int
    commute: bool
    obstruction_degree: Optional[int]
    obstruction_coefficient: complex
    multiplier_residual: float
    tol: float
    note: str = FORMAL_NOTE

    @property
    def verdict(self) -> str:
        if self.commute:
            return f'commute to order {self.order}'
        return f'obstruction at d = {self.obstruction_degree}, c_d = {self.obstruction_coefficient:.6g}'


def formal_commutation_check(f: TruncatedGerm, g: TruncatedGerm, tol: float = DEFAULT_TOL) -> CommutationReport:
    """Tangency of f o g o f^-1 o g^-1 to the identity"""
    if f.order != g.order:
        raise OrderMismatch(f'commutation check needs equal orders, got {f.order} and {g.order}')
    c = commutator(_formal(f), _formal(g))
    tangency = tangency_order(c, tol)
    report = CommutationReport(
        order=c.order,
        commute=tangency.is_identity,
        obstruction_degree=tangency.degree,
        obstruction_coefficient=tangency.coefficient,
        multiplier_residual=abs(complex(c.multiplier) - 1),
        tol=tol,
    )
    logger.info('commutator [%s, %s]: %s', f.tag, g.tag, report.verdict)
    return report


def conjugacy_defect(phi: TruncatedGerm, f1: TruncatedGerm, f2: TruncatedGerm,
                     tol: float = DEFAULT_TOL) -> Tangency:
    """Tangency of (phi o f1 o phi^-1) o f2^-1; identity when phi conjugates f1 to f2"""
    phi, f1, f2 = _formal(phi), _formal(f1), _formal(f2)
    return tangency_order(compose(conjugate(phi, f1), invert(f2)), tol)


@dataclass
class PairCheck:
    first: int
    second: int
    same_multiplier: bool
    quotient_is_identity: Optional[bool]
    commute: bool


@dataclass
class InjectivityReport:
    """Whether g -> g'(0) is injective on a family, checked pairwise"""
    pairs: List[PairCheck] = field(default_factory=list)
    note: str = FORMAL_NOTE

    @property
    def family_commutes(self) -> bool:
        return all(p.commute for p in self.pairs)

    @property
    def injective(self) -> bool:
        return all(p.quotient_is_identity for p in self.pairs if p.same_multiplier)


def multiplier_injectivity_check(germs: Sequence[TruncatedGerm], tol: float = DEFAULT_TOL) -> InjectivityReport:
    """
    For each pair with equal multipliers, checks that g1 o g2^-1 is the identity
    to the truncation order. On a commuting family of germs with a common
    nonlinearizable multiplier this is the computable side of injectivity of
    g -> g'(0).
    """
    report = InjectivityReport()
    for i, j in combinations(range(len(germs)), 2):
        g1, g2 = germs[i], germs[j]
        same = abs(complex(g1.multiplier) - complex(g2.multiplier)) <= tol
        quotient = tangency_order(compose(_formal(g1), invert(_formal(g2))), tol).is_identity if same else None
        report.pairs.append(PairCheck(i, j, same, quotient, formal_commutation_check(g1, g2, tol).commute))
    return report
