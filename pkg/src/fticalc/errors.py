"""Exception and warning types raised across the package.

Error names mirror the failure modes of the public operations; all inherit
from :class:`FticalcError` so callers can catch package failures wholesale.
"""


class FticalcError(Exception):
    """Base class for all package errors."""


class NotHermitian(FticalcError):
    pass


class NotUnitary(FticalcError):
    pass


class NotNormal(FticalcError):
    pass


class NotCommuting(FticalcError):
    pass


class DegreeMismatch(FticalcError):
    pass


class LengthMismatch(FticalcError):
    pass


class ShapeMismatch(FticalcError):
    pass


class DimensionMismatch(FticalcError):
    pass


class IndexOutOfRange(FticalcError):
    pass


class NormTooLarge(FticalcError):
    pass


class NotIrreducible(FticalcError):
    pass


class CanonicalizationExhausted(FticalcError):
    """No enumeration polynomial certified the tuple within the index budget.

    Signals a numerically borderline input: the exact theory guarantees a
    certifying polynomial exists, but not that one is found within floating
    point tolerances.
    """


class NumericalSplitFailure(FticalcError):
    """Decomposition could not split a reducible tuple to tolerance."""


class SchemeMismatch(FticalcError):
    pass


class DegreeAboveMax(FticalcError):
    pass


class DimensionCap(FticalcError):
    pass


class NotAPartition(FticalcError):
    pass


class OverlappingPieces(FticalcError):
    pass


class NotInjective(FticalcError):
    pass


class SingularValue(FticalcError):
    """A pointwise inverse met a numerically singular value."""


class NotSelfadjointValue(FticalcError):
    pass


class BoundViolation(UserWarning):
    """A declared bound profile was exceeded at an evaluated representative."""


class CentralityViolation(UserWarning):
    """A central-flagged function produced a non-scalar value at a representative."""
