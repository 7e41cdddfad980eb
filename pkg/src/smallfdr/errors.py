"""Exception types raised by smallfdr."""


class SmallFDRError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(SmallFDRError, ValueError):
    """An argument lies outside the domain of the operation."""


class DegenerateInputError(SmallFDRError, ValueError):
    """Inputs for which the requested quantity is undefined (e.g. 0/0)."""


class UnsupportedModelError(SmallFDRError, NotImplementedError):
    """The model or configuration is valid but not handled by this operation."""


class DataError(SmallFDRError, ValueError):
    """Measurement data that cannot be analyzed as supplied."""
