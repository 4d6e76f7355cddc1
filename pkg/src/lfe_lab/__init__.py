"""Covariance flows and Monte Carlo checks for local-field equations on sparse graphs."""

__version__ = "0.1.0"

from .errors import (
    DivergentIntegralError,
    DomainError,
    IntegrationError,
    LfeLabError,
    NoStationaryLawError,
    OutOfRangeError,
    SingularCovarianceError,
    StabilityError,
)
from .kernels import BACKEND
from .symcov import SymCov, make_symcov

__all__ = [
    "__version__",
    "BACKEND",
    "SymCov",
    "make_symcov",
    "LfeLabError",
    "DomainError",
    "OutOfRangeError",
    "NoStationaryLawError",
    "DivergentIntegralError",
    "SingularCovarianceError",
    "IntegrationError",
    "StabilityError",
]
