"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes: validation-type errors exit 2,
numeric failures exit 3, capacity errors exit 4.
"""

from __future__ import annotations


class SpecmonoError(Exception):
    """Base class for all library errors."""


class ValidationError(SpecmonoError, ValueError):
    """Malformed input: wrong shape, negative rate, non-finite entry, bad key."""

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        if field:
            message = f"{field}: {message}"
        super().__init__(message)


class StructureError(ValidationError):
    """A structural hypothesis (irreducibility, connectivity) does not hold."""


class DomainError(ValidationError):
    """Arguments fall outside the hypotheses of the result being applied."""


class NoThresholdError(DomainError):
    """The spectral bound never crosses zero; ``case`` names which regime applies."""

    def __init__(self, message: str, case: str):
        self.case = case
        super().__init__(message)


class DegenerateCaseError(DomainError):
    """Boundary case (m = 0 or M = 0) on which the classification is silent."""


class NumericError(SpecmonoError, ArithmeticError):
    """An iterative method failed to reach its tolerance."""

    def __init__(self, message: str, residual: float | None = None, last_iterate=None,
                 mu: float | None = None):
        self.residual = residual
        self.last_iterate = last_iterate
        self.mu = mu
        super().__init__(message)


class CapacityError(SpecmonoError):
    """Exhaustive enumeration requested above the configured size guard."""
