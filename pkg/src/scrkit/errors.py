"""Exception types shared across the package."""

from __future__ import annotations


class ScrError(Exception):
    """Base class for library errors."""


class FormulaSyntaxError(ScrError, ValueError):
    """Malformed formula text. ``column`` is 1-based."""

    def __init__(self, message: str, column: int, text: str = ""):
        super().__init__(f"{message} at offset {column}")
        self.column = column
        self.text = text


class BudgetExceeded(ScrError):
    """An exhaustive search would exceed (or has exceeded) its budget."""

    def __init__(self, message: str, needed: int | None = None, budget: int | None = None):
        super().__init__(message)
        self.needed = needed
        self.budget = budget


class PreconditionError(ScrError, ValueError):
    """An operation was called on inputs violating its precondition."""


class AlgebraMismatch(ScrError, ValueError):
    """An element does not belong to the algebra it is used with."""


class InputError(ScrError, ValueError):
    """Malformed or unreadable structure description."""
