"""
Error types
Exceptions raised by the transform, symmetry, pricing and oracle modules.
Every message names the precondition that was violated.
"""


class PricingError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameterError(PricingError, ValueError):
    """Market, grid or simulation parameters outside their admissible range."""


class ConfigValidationError(InvalidParameterError):
    """A setting from flags, config file or environment could not be used."""


class DomainError(PricingError, ValueError):
    """A point or query lies outside the domain of the map being applied."""


class StepSizeError(PricingError, ValueError):
    """A finite-difference stencil would leave the domain."""


class OffBarrierError(PricingError, ValueError):
    """A boundary residual was requested away from the barrier curve."""


class RankDeficiencyError(PricingError, ValueError):
    """The collocation system cannot separate the basis functions."""


class DegenerateGeneratorError(PricingError, ValueError):
    """A symmetry generator cannot be used for characteristic reduction."""


class RegionError(PricingError, ValueError):
    """A quantity was requested in a region of the (S, p) plane where it is undefined."""


class FitFailureError(PricingError, RuntimeError):
    """Terminal data could not be represented by the reduced solution basis."""


class InstabilityError(PricingError, RuntimeError):
    """A time-stepping solve produced non-finite values."""
