"""Exception hierarchy.

Validation problems (bad input files, violated preconditions) and numerical
problems (non-PD matrices, rank loss, degenerate universes) are kept apart so
the CLI can map them to different exit codes.
"""


class MvportError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(MvportError, ValueError):
    """Input data or configuration failed validation."""


class DomainError(ValidationError):
    """An argument lies outside the domain of the operation."""


class AlignmentError(ValidationError):
    """Price series do not share enough common dates."""


class DataGapError(ValidationError):
    """A price history has a gap too long to bridge."""


class InsufficientCapitalError(DomainError):
    """A withdrawal exceeds the capital available."""


class NumericalError(MvportError, ArithmeticError):
    """A numerical precondition (definiteness, rank, ...) does not hold."""


class NotPositiveDefiniteError(NumericalError):
    pass


class RankDeficientError(NumericalError):
    pass


class DegenerateUniverseError(NumericalError):
    """Mean returns are collinear with the ones vector (M = gamma * e)."""


class DegenerateSeriesError(NumericalError):
    """A series has zero dispersion where a positive one is required."""
