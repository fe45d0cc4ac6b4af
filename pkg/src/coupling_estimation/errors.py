"""Exception types shared across the package."""


class TruncationError(ValueError):
    """An amplitude or matrix element falls outside the truncated Fock space."""


class NormalizationError(ValueError):
    """Input state or phase vector is not normalized within tolerance."""


class DomainError(ValueError):
    """Argument outside the validated domain of a routine."""


class ConvergenceError(RuntimeError):
    """An iterative routine hit its iteration or size cap."""


class InsufficientPointsError(ValueError):
    """Too few data points for a fit."""


class GridTooCoarseError(ValueError):
    """Sampling grid does not resolve the density."""
