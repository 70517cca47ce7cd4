"""Exception types shared across the package."""


class NCInterpError(Exception):
    """Base class for all errors raised by this package."""


class InputError(NCInterpError, ValueError):
    """A caller-supplied value violates a documented precondition."""


class ShapeError(InputError):
    """Array arguments have inconsistent or non-square shapes."""


class SingularMatrixError(NCInterpError, ArithmeticError):
    """A matrix that must be invertible is singular at working precision."""


class ConvergenceError(NCInterpError, RuntimeError):
    """An iterative routine failed in a way that invalidates its output."""


class InconsistencyError(NCInterpError, RuntimeError):
    """Independently computed quantities disagree beyond tolerance.

    Raised when certified bounds cross, e.g. a lower estimate strictly
    exceeding an upper estimate.  This always indicates a bug or a badly
    conditioned instance, never a benign numerical wobble.
    """


class UsageError(NCInterpError, ValueError):
    """Command line arguments are syntactically valid but semantically wrong."""
