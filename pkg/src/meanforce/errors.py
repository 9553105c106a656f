"""Exception taxonomy for the meanforce package.

Numerical failures (quadrature, stochastic integration) are kept distinct
from configuration/validation problems so front ends can map them to
different exit codes.
"""


class MeanforceError(Exception):
    """Base class for all package-specific errors."""


class NumericalError(MeanforceError):
    """Base class for runtime numerical failures."""


class NonConvergenceError(NumericalError):
    """An adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, message, value=None, estimate=None):
        super().__init__(message)
        self.value = value
        self.estimate = estimate


class NonFiniteIntegrandError(NumericalError):
    """The integrand returned NaN or Inf inside the integration domain."""


class PoleOnBoundaryError(NumericalError):
    """A principal-value pole sits within one excision window of a domain endpoint."""


class DomainEdgeError(NumericalError):
    """A finite-difference stencil would step outside the function's domain."""


class NoClosedFormError(MeanforceError):
    """The susceptibility model has no closed-form real part."""


class NegativeImChiError(MeanforceError):
    """Passivity violation: a model returned Im chi < 0 for omega >= 0."""


class PoleHitError(NumericalError):
    """Undamped pole of the Green's function hit at an evaluation frequency."""

    def __init__(self, message, omega=None):
        super().__init__(message)
        self.omega = omega


class SpectrumUnresolvableError(MeanforceError):
    """The synthesis grid cannot resolve the narrowest spectral feature."""


class InstabilityError(NumericalError):
    """Trajectory energy grew beyond the stability guard (time step too large)."""

    def __init__(self, message, dt=None):
        super().__init__(message)
        self.dt = dt


class ReferenceLimitError(NumericalError):
    """The classical high-temperature plateau was not reached below the cap."""


class ConfigError(MeanforceError):
    """Invalid or malformed run configuration."""
