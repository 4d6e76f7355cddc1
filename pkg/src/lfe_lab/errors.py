"""Exception hierarchy shared by every module.

Each class maps onto one CLI exit code (see :mod:`lfe_lab.cli`).
"""


class LfeLabError(Exception):
    """Base class for all library errors."""


class DomainError(LfeLabError, ValueError):
    """An argument lies outside the documented domain of an operation."""


class OutOfRangeError(DomainError, IndexError):
    """A time, index or distance falls outside the available range."""


class NoStationaryLawError(DomainError):
    """The interaction regime admits no stationary Gaussian law (alpha <= |beta|)."""


class DivergentIntegralError(DomainError):
    """An exponential moment is infinite for the requested parameters."""


class SingularCovarianceError(LfeLabError, ArithmeticError):
    """A covariance (or parametrization) is singular or not positive definite."""


class IntegrationError(LfeLabError, RuntimeError):
    """The ODE integrator could not produce an admissible step."""


class StabilityError(LfeLabError, RuntimeError):
    """An explicit time step would make the discrete scheme unstable."""
