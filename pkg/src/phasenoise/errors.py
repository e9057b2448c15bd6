"""Exception types shared across the package."""


class PhaseNoiseError(Exception):
    """Base class for all package-specific errors."""


class DomainError(PhaseNoiseError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class SupportMismatchError(DomainError):
    """KL divergence requested where p puts mass outside the support of q."""


class TruncationError(PhaseNoiseError, RuntimeError):
    """A photon-number series could not reach the tail target within n_cap."""


class BracketError(PhaseNoiseError, ValueError):
    """Root finding called without a sign change on the bracket."""


class ConvergenceError(PhaseNoiseError, RuntimeError):
    """An iterative routine exhausted its budget before reaching tolerance."""


class PhysicalityError(DomainError):
    """A covariance matrix fails the single-mode uncertainty condition."""


class UnsupportedSignalError(PhaseNoiseError, TypeError):
    """An operation does not support the given signal kind."""


class InfeasibleSqueezingError(DomainError):
    """Squeezing exceeds the pulse energy budget (sinh^2 r > pulse energy)."""


class BlockEntropyError(DomainError):
    """Ensemble entry violates the single-occupied-mode (rank-one block) rule."""


class AllInfeasibleError(PhaseNoiseError, ValueError):
    """Every coarse-grid point of an optimization was infeasible."""
