"""Exception types shared across the package."""


class ModGaussError(Exception):
    """Base class for all package errors."""


class DomainError(ModGaussError, ValueError):
    """An argument lies outside the region where a function is defined."""


class QuadratureError(ModGaussError, ArithmeticError):
    """Adaptive quadrature could not reach the requested tolerance."""


class ZoneError(ModGaussError, ValueError):
    """Zone-of-control constants violate the admissibility conditions."""


class UnsupportedParameter(ModGaussError, ValueError):
    """A parameter combination has no sampler implementation."""
