"""Error types for dataset and model handling."""


class CnnClassifierError(Exception):
    """Base class for all errors raised by this package."""


class DatasetError(CnnClassifierError):
    """Dataset directory is missing, malformed, or inconsistent."""


class ValidationError(CnnClassifierError):
    """An argument violates a documented precondition."""
