"""Exception types raised by pwbreak."""

import numpy as np


class PiecewiseError(Exception):
    """Base class for all pwbreak errors."""


class InvalidInput(PiecewiseError, ValueError):
    """Input data or parameters violate a precondition."""


class LengthMismatch(InvalidInput):
    pass


class NonFinite(InvalidInput):
    pass


class TooFewPoints(InvalidInput):
    pass


class InvalidBreakpoints(InvalidInput):
    pass


class EmptySegment(InvalidInput):
    pass


class NoCandidates(InvalidInput):
    pass


class TooLarge(InvalidInput):
    pass


class ConstantTarget(InvalidInput):
    pass


class InvalidSpec(InvalidInput):
    pass


class SingularSystem(PiecewiseError, np.linalg.LinAlgError):
    """The KKT matrix is numerically singular.

    Usually means a segment holds too few distinct abscissae for the
    requested degree.
    """
