"""Exception taxonomy shared across the package."""


class LevyTailsError(Exception):
    """Base class for all package-specific errors."""


class DomainError(LevyTailsError):
    """Evaluation requested outside the domain of an exponent or MGF."""


class ConvergenceError(LevyTailsError):
    """An iterative eigenvalue/root computation failed to converge."""


class SingularMatrixError(LevyTailsError):
    """A linear solve hit a (numerically) singular matrix."""


class NotSimpleError(LevyTailsError):
    """A pole/eigenvalue required to be algebraically simple is not."""


class ReducibleError(LevyTailsError):
    """The modulating chain is reducible where irreducibility is required."""


class DomainDegenerateError(LevyTailsError):
    """The joint exponent domain is a single point; no root search possible."""


class BUnknownError(LevyTailsError):
    """Tail bounds requested but the singularity-free band width is unknown."""


class DegenerateError(LevyTailsError):
    """Closed-form solver given a degenerate parameter set (no killing)."""


class NoConvergenceError(LevyTailsError):
    """Fixed-point iteration ended above its residual tolerance."""


class BracketFailureError(LevyTailsError):
    """Could not bracket a sign change for the scalar root solve."""


class InsufficientTailError(LevyTailsError):
    """Too few usable points in the requested tail window."""
