"""Exception hierarchy shared by the package."""


class SensorDenoiseError(Exception):
    """Base class for all package errors."""


class ConfigurationError(SensorDenoiseError, ValueError):
    """Invalid arguments or experiment configuration."""


class InvalidDimensionError(ConfigurationError):
    pass


class InvalidRadiusError(ConfigurationError):
    pass


class DimensionMismatchError(ConfigurationError):
    pass


class UnsupportedTargetError(ConfigurationError):
    pass


class InvalidKernelError(ConfigurationError):
    pass


class NumericalError(SensorDenoiseError, ArithmeticError):
    """A solver produced non-finite values or a degenerate solution."""


class DegenerateSolutionError(NumericalError):
    pass


class NonTerminationError(SensorDenoiseError, RuntimeError):
    pass


class BudgetExceededError(SensorDenoiseError, RuntimeError):
    """The label oracle has no queries left."""


class EmptyBandError(SensorDenoiseError, RuntimeError):
    """No sensors fall inside the sampling band, even after widening."""


class MalformedDataError(ConfigurationError):
    """Input table is missing columns, rows or has unparsable values."""
