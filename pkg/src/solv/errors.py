"""Exception hierarchy shared by every solv module."""

from __future__ import annotations


class SolvError(Exception):
    """Base class for all errors raised by solv."""


class ParseError(SolvError, ValueError):
    """Malformed expression text.

    ``pos`` is the 0-based character offset where parsing failed.
    """

    def __init__(self, message: str, pos: int | None = None, text: str | None = None):
        self.pos = pos
        self.text = text
        if pos is not None:
            message = f"{message} (at position {pos})"
        super().__init__(message)


class DomainError(SolvError, ValueError):
    """Input outside the domain where an operation is defined."""


class SingularityError(SolvError, ArithmeticError):
    """Evaluation hit a pole, a log of a non-positive value, or a degenerate metric."""


class FormError(SolvError, ValueError):
    """An expression cannot be brought into the requested coefficient form."""


class BindingError(SolvError, KeyError):
    """A function symbol or parameter has no numeric binding."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "missing binding"
