"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: ConfigError -> 1, DataError (and its
subclasses) and DomainError -> 2, ShapeError and NumericError -> 3.
"""


class ConvsarcError(Exception):
    """Base class for all package errors."""


class ConfigError(ConvsarcError):
    """Invalid configuration value, missing path, or inconsistent setup."""


class DataError(ConvsarcError):
    """Problem with input data files or records."""


class ParseError(DataError):
    """Malformed input file; message carries the line number or record id."""


class ValidationError(DataError):
    """Record parsed fine but violates a corpus invariant."""


class DomainError(ConvsarcError):
    """Argument outside an operation's domain (empty input, bad index, ...)."""


class ShapeError(ConvsarcError):
    """Tensor dimensions do not line up; message names the offending tensor."""


class NumericError(ConvsarcError):
    """Non-finite value where a finite one is required."""
