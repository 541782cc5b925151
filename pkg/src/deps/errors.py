"""Exception types raised by the library."""


class DepsError(Exception):
    """Base class for every error raised by this package."""


class InvalidAlgebraElement(DepsError, ValueError):
    """Matrix is not an element of the expected Lie algebra."""


class ConstraintViolation(DepsError, ValueError):
    """Input lies off the admissible displacement variety."""


class DomainError(DepsError, ValueError):
    """Parameters outside the domain where a formula is defined."""


class InvalidConfiguration(DepsError, ValueError):
    """Physical configuration or simulation config is invalid."""


class SolverDivergence(DepsError, RuntimeError):
    """Newton iteration failed to reach the residual tolerance."""


class BranchFailure(DepsError, RuntimeError):
    """The multivalued map has no admissible real branch at this point.

    ``diagnostic`` carries whatever the caller found useful for a post
    mortem (targets, seeds tried, residuals).
    """

    def __init__(self, message, diagnostic=None):
        super().__init__(message)
        self.diagnostic = dict(diagnostic or {})
