"""Exception hierarchy shared by all emchan modules."""

from __future__ import annotations


class EmchanError(Exception):
    """Base class for all package errors."""


class DomainError(EmchanError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class SingularityError(DomainError):
    """Evaluation requested at a singular point (e.g. zero separation)."""


class ShapeError(EmchanError, ValueError):
    """Array arguments have inconsistent shapes."""


class GeometryError(EmchanError, ValueError):
    """Requested geometry cannot be realized (e.g. delay shorter than LOS)."""


class NumericalError(EmchanError, ArithmeticError):
    """A numerical routine failed to produce a trustworthy result."""


class ValidationError(EmchanError, ValueError):
    """Scenario validation failed; ``messages`` lists every violation."""

    def __init__(self, messages: list[str]):
        self.messages = list(messages)
        super().__init__("; ".join(self.messages))
