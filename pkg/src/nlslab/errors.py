"""Exception types raised across the package."""


class NlsLabError(Exception):
    """Base class for all package errors."""


class ParameterError(NlsLabError, ValueError):
    """Model or solution parameters outside their admissible domain."""


class NonFiniteError(NlsLabError, ValueError):
    pass


class NearSingularError(NlsLabError):
    """A closed-form denominator came too close to zero on the grid."""


class DecayError(NlsLabError):
    """A weighted integrand does not decay at the grid boundary."""


class BackgroundMismatch(NlsLabError, ValueError):
    pass


class OrbitEscaped(NlsLabError):
    """The r_alpha orbit left (0, inf) or was certified to run off to infinity."""

    def __init__(self, message, t_escape):
        super().__init__(message)
        self.t_escape = t_escape


class BlowUpDetected(NlsLabError):
    """Raised by the integrator when the field stops being finite or resolved.

    Carries the last finite field and the trajectory sampled so far.
    """

    def __init__(self, t, field, trajectory=None, reason=""):
        super().__init__(f"blow-up detected at t={t:.6g}" + (f" ({reason})" if reason else ""))
        self.t = t
        self.field = field
        self.trajectory = trajectory
        self.reason = reason


class IdentityResidualError(NlsLabError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ConvergenceError(NlsLabError):
    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual
