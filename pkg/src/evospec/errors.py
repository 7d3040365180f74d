"""Exception types used across the package."""


class EvospecError(Exception):
    """Base class for all package errors."""


class ConfigError(EvospecError):
    """Invalid configuration or parameter value."""


class GridError(EvospecError):
    """Frequency grid cannot be built from the given configuration."""


class SizeError(EvospecError):
    """Series too short for the requested operation."""


class DegenerateVarianceError(EvospecError):
    """A variance denominator collapsed to zero with no floor configured."""


class DegenerateDenominatorError(EvospecError):
    """A ratio denominator collapsed to zero with no floor configured."""


class NumericsError(EvospecError):
    """A numerical routine failed to converge."""


class AlgorithmError(EvospecError):
    """The sequential detection loop exceeded its iteration guard."""


class ParseError(EvospecError):
    """Malformed input file."""

    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row
