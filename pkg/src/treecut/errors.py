"""Shared exception types, mapped to CLI exit codes."""


class TreecutError(Exception):
    """Base class for all errors raised by this package."""


class InputError(TreecutError):
    """Malformed input: bad file, bad weights, undeclared vertices, ..."""

    exit_code = 2


class BudgetError(TreecutError):
    """A size guard refused to start work that would exceed its budget."""

    exit_code = 3

    def __init__(self, message, limit=None, requested=None):
        super().__init__(message)
        self.limit = limit
        self.requested = requested


class InvariantError(TreecutError):
    """An internal invariant failed; indicates a bug, not bad input."""

    exit_code = 4
