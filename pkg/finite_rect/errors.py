class FiniteRectError(Exception):
    """Base class for every error raised by finite_rect."""


class UsageError(FiniteRectError, ValueError):
    """Degree, shape or parameter misuse (CLI exit code 2)."""


class DomainError(FiniteRectError, ValueError):
    """Argument outside the domain of an operation."""


class SingularSeriesError(DomainError):
    """Compositional inverse requested for a series with vanishing linear term."""


class RealRootednessError(FiniteRectError, ArithmeticError):
    """Root finder met complex or negative roots beyond tolerance."""


class InvalidTransformError(RealRootednessError):
    """A finite R-transform that is not the transform of any nonneg-rooted polynomial."""

