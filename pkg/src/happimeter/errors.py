"""Typed exceptions shared across the package."""


class HappimeterError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(HappimeterError, ValueError):
    """A value is outside its documented range or shape."""


class ContractViolation(HappimeterError):
    """A caller broke a documented precondition (e.g. unsorted input)."""


class ConfigurationError(HappimeterError):
    """Bad or missing configuration (unknown timezone, unknown rule, ...)."""


class SchedulingError(HappimeterError):
    """A prompt schedule cannot be constructed for the given window."""


class UndefinedCorrelationError(HappimeterError):
    """Correlation is undefined (zero variance in one of the inputs)."""


class EmptyDatasetError(HappimeterError):
    """A training or evaluation routine received no usable examples."""


class EnrichmentUnavailableError(HappimeterError):
    """Weather enrichment could not be resolved for a lookup."""


class NotFoundError(HappimeterError):
    """A referenced entity (user, friendship, model) does not exist."""
