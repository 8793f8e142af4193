"""Exception hierarchy shared by every module."""

from __future__ import annotations


class MetricLagError(Exception):
    """Base class for all errors raised by :mod:`metriclag`."""


class ParameterError(MetricLagError, ValueError):
    """A deformation or physical parameter is outside its admissible range."""


class DomainError(MetricLagError, ValueError):
    """An operator was evaluated at a point where it is undefined."""


class RangeError(MetricLagError, ValueError):
    """A sampled function was evaluated outside its grid."""


class IntegrationError(MetricLagError, ArithmeticError):
    """Quadrature or time integration failed.

    ``location`` holds the abscissa (or time) at which the failure was
    detected, when known.
    """

    def __init__(self, message: str, location: float | None = None):
        super().__init__(message)
        self.location = location


class GridError(MetricLagError, ValueError):
    """A grid is too coarse, too short, or not strictly increasing."""


class ConvergenceError(MetricLagError, ArithmeticError):
    """An iterative method did not reach its tolerance."""


class ExprSyntaxError(MetricLagError, ValueError):
    """Malformed expression text. ``offset`` is the byte offset of the fault."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class UnknownIdentifierError(MetricLagError, ValueError):
    def __init__(self, name: str, offset: int):
        super().__init__(f"unknown identifier {name!r} (at offset {offset})")
        self.name = name
        self.offset = offset


class EvaluationError(MetricLagError, ArithmeticError):
    """Expression evaluation hit an unbound variable or a domain fault."""

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (node at offset {offset})"
        super().__init__(message)
        self.offset = offset


class ValidationError(MetricLagError, ValueError):
    """Scenario or plot input failed validation. ``problems`` lists each fault."""

    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = list(problems)
