"""Exception types raised across the package."""


class BcjrLabError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(BcjrLabError, ValueError):
    """An argument is outside its valid domain."""


class DegenerateChannelError(BcjrLabError, ValueError):
    """A tap row has zero norm and cannot be normalized."""


class ContractViolation(BcjrLabError, ValueError):
    """An input object does not satisfy a documented precondition."""


class NumericalError(BcjrLabError, ArithmeticError):
    """A computation produced non-finite or degenerate values."""


class ConfigError(BcjrLabError, ValueError):
    """A scenario configuration is malformed or inconsistent.

    ``key`` names the offending configuration key when known.
    """

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key
