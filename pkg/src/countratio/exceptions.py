"""Exception and warning types shared across the package."""


class CountRatioError(Exception):
    """Base class for errors raised by this package."""


class ParameterError(CountRatioError, ValueError):
    """A model or distribution parameter is outside its valid range."""


class DomainError(CountRatioError, ValueError):
    """An evaluation point or target level is outside the valid domain."""


class DataError(CountRatioError, ValueError):
    """Input data is malformed or dimensionally inconsistent."""


class NumericalError(CountRatioError, RuntimeError):
    """A numerical routine failed (degenerate kernel, division by zero, ...)."""


class TruncationWarning(UserWarning):
    """A gridded distribution does not account for all of its probability mass."""


class RenormalizationWarning(UserWarning):
    """A gridded density was far enough from unit mass that it was rescaled."""
