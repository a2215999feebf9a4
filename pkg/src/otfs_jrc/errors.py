"""Exception hierarchy shared across the package.

The CLI maps these onto distinct exit codes, so keep the split between
validation problems, file problems, and empty-spectrum outcomes.
"""


class JrcError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(JrcError):
    """A parameter or configuration value is out of its allowed domain."""


class DomainMismatchError(JrcError):
    """An operation received a grid tagged with the wrong signal domain."""


class DimensionMismatchError(JrcError):
    """Two grids or maps that must share a frame configuration do not."""


class InsufficientDataError(JrcError):
    """Not enough dwells or samples to run the requested estimator."""


class NoSignalError(JrcError):
    """The spectrum is identically zero inside the searched band."""


class GridFileError(JrcError):
    """A grid file is malformed: bad magic, version, or truncated payload."""
