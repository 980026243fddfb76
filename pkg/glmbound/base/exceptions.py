from typing import Optional


class GlmBoundError(Exception):
    """
    Base class of every error raised by glmbound.
    """


class ParseError(GlmBoundError, ValueError):
    """
    Raised when matrix or vector text cannot be parsed.

    Attributes
    ----------
    row:
        1-based line number of the offending row

    column:
        1-based column of the offending token, `None` when the whole
        row is at fault
    """

    def __init__(
        self, message: str, row: int, column: Optional[int] = None
    ) -> None:
        location = f'row {row}'
        if column is not None:
            location += f', column {column}'
        super().__init__(f'{location}: {message}')
        self.row: int = row
        self.column: Optional[int] = column


class DomainError(GlmBoundError, ValueError):
    """
    Raised when an argument lies outside the domain of an operation.
    """


class PreconditionError(GlmBoundError, ValueError):
    """
    Raised when a documented precondition of an operation does not
    hold.
    """


class EstimationError(GlmBoundError, RuntimeError):
    """
    Raised when an estimator cannot produce a finite estimate.
    """


class ConvergenceError(GlmBoundError, RuntimeError):
    """
    Raised when a quadrature does not self-converge.

    Attributes
    ----------
    achieved:
        Relative change observed between the last two refinements
    """

    def __init__(self, message: str, achieved: float) -> None:
        super().__init__(f'{message} (achieved {achieved:.3g})')
        self.achieved: float = achieved


class InvariantViolation(GlmBoundError, AssertionError):
    """
    Raised when a mathematical invariant fails at run time, e.g. a
    lower bound exceeding a measured risk.
    """
