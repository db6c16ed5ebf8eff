"""Exception types shared across the package."""

from __future__ import annotations


class MaxFilterError(Exception):
    """Base class for all package errors."""


class NotOrthogonal(MaxFilterError):
    """A supplied matrix is not orthogonal within tolerance."""


class ClosureOverflow(MaxFilterError):
    """Group closure did not stabilize below the element cap."""


class SizeOverflow(MaxFilterError):
    """A requested family would exceed the configured order cap."""


class LengthMismatch(MaxFilterError):
    """Signals of different lengths passed to a circular operation."""


class NegativeRadicand(MaxFilterError):
    """Polarization radicand fell below -eq_tol; group data is inconsistent."""


class LpNumericalFailure(MaxFilterError):
    """The cone-interior LP did not return a clean optimum."""


class NotNicePoint(MaxFilterError):
    """Point fails the principal / unique-argmax preconditions."""


class CaseMismatch(MaxFilterError):
    """Witness construction requested for a group outside its case."""


class DomainError(MaxFilterError):
    """Parameter outside the domain of a closed-form bound."""


class ConfigError(MaxFilterError):
    """Experiment configuration is missing, malformed, or inconsistent."""


class BudgetExceeded(MaxFilterError):
    """Search budget exhausted.  Carries the best value found so far.

    ``partial`` is a lower bound for maximization searches and an upper
    bound for minimization searches; either way it is not certified.
    """

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial
