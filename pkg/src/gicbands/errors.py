"""Exception types shared across the package."""


class GicBandsError(Exception):
    """Base class for errors raised by gicbands."""


class DataValidationError(GicBandsError, ValueError):
    """Invalid input data, parameters, or grid configuration (CLI exit code 2)."""


class NumericalError(GicBandsError, RuntimeError):
    """A numerical procedure failed or is undefined for the inputs (CLI exit code 3)."""
