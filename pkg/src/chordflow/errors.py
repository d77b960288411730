"""Exception hierarchy shared by all modules."""


class ChordFlowError(Exception):
    """Base class for every error raised by this package."""


class GridError(ChordFlowError, ValueError):
    """Invalid grid construction or grid/field mismatch."""


class ParameterError(ChordFlowError, ValueError):
    """A numeric parameter is outside its documented range."""


class DomainError(ChordFlowError, ValueError):
    """A point lies outside the region where the operation is defined."""


class UnsupportedError(ChordFlowError, NotImplementedError):
    """Requested branch (exponent range, dimension) is not supported."""


class DegenerateConvexityError(ChordFlowError, ArithmeticError):
    """Radius of curvature fell below the convexity floor."""


class StallError(ChordFlowError, RuntimeError):
    """Time step underflowed while trying to keep the flow admissible."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class FitError(ChordFlowError, ValueError):
    """A regression could not be performed on the supplied data."""


class CoverageError(ChordFlowError, ValueError):
    """Sampling region does not cover the body."""
