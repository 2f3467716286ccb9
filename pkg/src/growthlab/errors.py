"""Exception hierarchy shared by every module.

Each class carries the CLI exit code it maps to.
"""


class GrowthLabError(Exception):
    exit_code = 1


class UsageError(GrowthLabError):
    """Malformed model/subgroup spec string or bad parameter."""

    exit_code = 2

    def __init__(self, message, suggestions=None):
        self.suggestions = list(suggestions or [])
        if self.suggestions:
            message = f"{message} (did you mean: {', '.join(self.suggestions)}?)"
        super().__init__(message)


class UnsupportedError(UsageError):
    """Operation is not defined for the given model kind."""


class DomainError(UsageError):
    """Argument outside the mathematical domain (negative height, empty word...)."""


class ResourceExhausted(GrowthLabError):
    """A memory/size budget was hit before the requested radius was reached.

    ``achieved`` is the largest radius that was fully enumerated and
    ``partial`` holds whatever result is meaningful up to that radius.
    """

    exit_code = 3

    def __init__(self, message, achieved=None, partial=None):
        super().__init__(message)
        self.achieved = achieved
        self.partial = partial


class RegionExhausted(ResourceExhausted):
    """A point lies outside the enumerated region of a model."""

    def __init__(self, point, radius=None):
        msg = f"point {point!r} is outside the enumerated region"
        if radius is not None:
            msg += f" (enumerated radius {radius})"
        super().__init__(msg, achieved=radius)
        self.point = point


class NeedsMorePrefix(ResourceExhausted):
    """Boundary points could not be told apart within the allowed prefix depth."""


class ConvergenceError(ResourceExhausted):
    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class InvariantViolation(GrowthLabError):
    """A checked mathematical invariant failed."""

    exit_code = 4
