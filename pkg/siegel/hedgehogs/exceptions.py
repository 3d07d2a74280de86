"""
Exception hierarchy for the hedgehogs application.
"""

from typing import Any, List, Optional


class HedgehogError(Exception):
    """Base class for every error raised by the hedgehogs library"""


class InvalidGerm(HedgehogError):
    """Germ data that cannot represent a diffeomorphism fixing 0"""


class OrderMismatch(HedgehogError):
    """Operation needs germs of the same truncation order"""


class InvalidContinuedFraction(HedgehogError):
    """Partial quotients that do not define a number in (0, 1)"""


class BoundViolation(HedgehogError):
    """A quantity exceeded a ceiling that holds for every valid input"""


class PreconditionError(HedgehogError):
    """A documented precondition of an operation does not hold"""

    def __init__(self, clause: str, message: Optional[str] = None):
        self.clause = clause
        super().__init__(message or f'precondition violated: {clause}')


class NotTangentToIdentity(PreconditionError):
    def __init__(self, multiplier: complex, tol: float):
        self.multiplier = multiplier
        super().__init__(
            '|a_1 - 1| <= tol',
            f'germ is not tangent to the identity: a_1 = {multiplier} (tol {tol:g})',
        )


class NotReduced(PreconditionError):
    """Germ is not of the form lambda z + O(z^N); run reduce_to_order first"""

    def __init__(self, N: int, index: int, modulus: float):
        self.N = N
        self.index = index
        super().__init__(
            f'f = lambda z + O(z^{N})',
            f'coefficient a_{index} has modulus {modulus:.3e}; '
            f'reduce the germ with reduce_to_order(f, {N}) first',
        )


class ResonantMultiplier(PreconditionError):
    def __init__(self, k: int, distance: float):
        self.k = k
        self.distance = distance
        super().__init__(
            'multiplier is not a root of unity of order <= N',
            f'|lambda^{k} - 1| = {distance:.3e}: multiplier treated as resonant',
        )


class DepthExceeded(PreconditionError):
    def __init__(self, requested: int, depth: int):
        super().__init__(
            'K <= stored depth',
            f'requested {requested} convergent terms but only {depth} are stored',
        )


class OutsideSector(PreconditionError):
    """Point or disk not inside the declared petal sector"""


class GridTooSmall(PreconditionError):
    """Domain does not fit inside the grid extent"""


class CompactTooSmall(PreconditionError):
    """Compact approximation does not reach a required circle"""


class MissingCompact(PreconditionError):
    def __init__(self):
        super().__init__('needs compact approximation',
                         'needs compact approximation: run render first and pass --compact')


class DivisorUnderflow(HedgehogError):
    """A small divisor fell below the precision floor; retry with more bits"""

    def __init__(self, index: int, divisor: float, precision_bits: int):
        self.index = index
        self.divisor = divisor
        self.precision_bits = precision_bits
        super().__init__(
            f'|lambda^{index} - lambda| = {divisor:.3e} is below the floor for '
            f'{precision_bits}-bit arithmetic; retry with {2 * precision_bits} bits'
        )


class OrbitExited(HedgehogError):
    def __init__(self, step: int, requested: int):
        self.step = step
        super().__init__(f'orbit left the exit disk at step {step} before step {requested}')


class SectorExit(HedgehogError):
    def __init__(self, step: int):
        self.step = step
        super().__init__(f'orbit left the petal sector at step {step}')


class ZeroEscaped(HedgehogError):
    """The pixel of the fixed point escaped: margin or precision is wrong"""


class TrackingError(HedgehogError):
    """Backward tracking of a domain failed; partial results are attached"""

    def __init__(self, n: int, message: str, partial: Optional[List[Any]] = None):
        self.n = n
        self.partial = partial or []
        super().__init__(f'tracking aborted at n = {n}: {message}')


class PolygonSelfIntersection(TrackingError):
    def __init__(self, n: int, partial: Optional[List[Any]] = None):
        super().__init__(n, 'polygon self-intersects', partial)
