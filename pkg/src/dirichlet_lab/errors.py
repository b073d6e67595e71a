"""Shared exception types.

Validation errors map to CLI exit code 1, budget errors to exit code 2.
"""


class DirichletLabError(Exception):
    pass


class ValidationError(DirichletLabError, ValueError):
    """Bad input: out-of-domain argument, broken invariant, malformed config."""


class DomainError(ValidationError):
    """Argument outside the domain of a function (t < t0, s < s0, ...)."""


class BudgetError(DirichletLabError, RuntimeError):
    """A resource guard tripped; the query is too large for exact evaluation."""


class CapExceeded(BudgetError):
    """Enumeration produced more points than the configured cap."""


class BudgetExceeded(BudgetError):
    """An enumeration/scan budget was exceeded before completion."""


class DimensionTooLarge(ValidationError):
    """Exact enumeration is only supported for d <= 6."""


class ConstructionError(DirichletLabError, RuntimeError):
    """Rejection sampling exceeded its retry cap; signals a bug, not bad luck."""
