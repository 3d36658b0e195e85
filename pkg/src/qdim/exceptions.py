"""Exception types raised across the package."""


class QdimError(Exception):
    """Base class for all package errors."""


class DomainError(QdimError, ValueError):
    """A word or value lies outside the domain of an operation."""


class SizeLimitError(QdimError):
    """An enumeration or construction would exceed a configured cap."""

    def __init__(self, message, cap=None):
        super().__init__(message)
        self.cap = cap


class StandingAssumptionError(QdimError, ValueError):
    """Raised by hat-potential operations when p3 > p1.

    The dimension pipeline does not depend on these operations, so callers
    with p3 > p1 should use :func:`qdim.pressure.solve_t0` directly.
    """


class ConsistencyError(QdimError, RuntimeError):
    """An internal numerical consistency check failed."""
