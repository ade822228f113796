"""Exception hierarchy shared across frontlab."""


class FrontlabError(Exception):
    """Base class for all frontlab errors."""


class DomainError(FrontlabError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class NewtonDiverged(FrontlabError):
    """A Newton iteration failed to reach its residual tolerance."""

    def __init__(self, message, residual_norm=None, iterations=None):
        super().__init__(message)
        self.residual_norm = residual_norm
        self.iterations = iterations


class ConvergenceError(FrontlabError):
    """A scalar root solve or fixed-point iteration failed to converge."""


class QuadratureError(FrontlabError):
    """Adaptive quadrature did not converge to the requested tolerance."""


class SingularJacobian(FrontlabError):
    """The boundary-value Jacobian factorization failed (exactly singular)."""


class ResonanceDetected(FrontlabError):
    """Spatial-eigenvalue resonance: far-field closure degenerate, Jacobian
    condition estimate beyond trust threshold.  Occurs along the transition
    curve where the chemical's own decay rate collides with the front decay
    rate (near delta^2 ~ 0.53)."""

    def __init__(self, message, condition_estimate=None, delta2=None, d1=None):
        super().__init__(message)
        self.condition_estimate = condition_estimate
        self.delta2 = delta2
        self.d1 = d1


class DegenerateDecay(FrontlabError):
    """Pushed-front decay rate left the strong branch (collided with the
    double-root rate); the pushed ansatz no longer distinguishes the front
    from a pulled one."""


class NoBracket(FrontlabError):
    """Root bracketing failed: the target function has the same sign at both
    bracket endpoints."""


class WindowError(FrontlabError):
    """A far-field fitting window has insufficient span or samples."""


class EigSolverFailure(FrontlabError):
    """The generalized eigenvalue solve failed."""


class IllConditioned(FrontlabError):
    """A least-squares fit is too ill-conditioned to trust."""
