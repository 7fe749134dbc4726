"""Exception hierarchy shared by all ietlab modules."""


class IetLabError(Exception):
    """Base class for every error raised by ietlab."""


class InvalidArgument(IetLabError, ValueError):
    pass


class DomainError(IetLabError, ValueError):
    """A point lies outside the domain of the map being evaluated."""


class DegenerateStep(IetLabError, ArithmeticError):
    """Rauzy-Veech step with (numerically) equal competing lengths.

    This is a Keane-condition violation; ``step`` records the induction
    index at which it occurred when known.
    """

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class InvalidSuspension(IetLabError, ValueError):
    """Suspension datum outside the cone of admissible tau."""


class SingularEvaluation(IetLabError, ArithmeticError):
    """Cocycle evaluated within the hard floor of a singular point."""

    def __init__(self, message, letter=None, side=None, point=None):
        super().__init__(message)
        self.letter = letter
        self.side = side
        self.point = point


class StructuralError(IetLabError, RuntimeError):
    """Internal consistency check failed (orbit search, floor crossing, ...)."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class BudgetExceeded(IetLabError, RuntimeError):
    """An iteration budget ran out before a brute-force search concluded."""


class StageDependencyError(IetLabError, FileNotFoundError):
    """A pipeline stage was run before the stage it depends on."""


class ConfigError(IetLabError, ValueError):
    """Experiment configuration failed schema validation."""
