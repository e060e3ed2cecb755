"""Exception types shared across the package."""


class ErgoaccelError(Exception):
    """Base class for every error raised by this package."""


class DomainError(ErgoaccelError, ValueError):
    """An argument lies outside an operation's mathematical domain."""


class SpecificationError(ErgoaccelError, ValueError):
    """A problem description is internally inconsistent or mismatched."""


class DegenerateWeightError(ErgoaccelError, ArithmeticError):
    """The weight sum A_N vanished, so a normalized average is undefined."""


class DegenerateRateError(ErgoaccelError, ArithmeticError):
    """A rate minimum was requested over an empty admissible set."""


class QuadratureConvergenceError(ErgoaccelError, ArithmeticError):
    """Panel doubling exhausted its budget without meeting the tolerance.

    Carries the last two refinement values so callers can judge how far
    the iteration was from agreement.
    """

    def __init__(self, message, last=None, previous=None):
        super().__init__(message)
        self.last = last
        self.previous = previous


class ContourError(ErgoaccelError, ArithmeticError):
    """Contour evaluation of a kernel derivative produced non-finite values."""


class DivergenceError(ErgoaccelError, ArithmeticError):
    """An orbit left its bounding box."""

    def __init__(self, message, step=None, state=None):
        super().__init__(message)
        self.step = step
        self.state = state


class InsufficientDataError(ErgoaccelError, ValueError):
    """Fewer than three usable points remain for a least-squares fit."""


class SeriesAbortedError(ErgoaccelError, ArithmeticError):
    """An error series failed partway through its schedule.

    ``partial`` holds the entries completed before the failure.
    """

    def __init__(self, message, partial=()):
        super().__init__(message)
        self.partial = tuple(partial)
