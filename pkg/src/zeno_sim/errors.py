"""Exception types raised across the package."""


class DomainError(ValueError):
    """A parameter lies outside the domain an operation is defined on."""


class GridMismatchError(ValueError):
    """A requested time is not representable on the simulation step grid."""


class FitError(ValueError):
    """The short-time decay fit cannot be performed."""


class InsufficientPointsError(FitError):
    pass


class DegenerateWindowError(FitError):
    pass


class ConfigError(ValueError):
    """Malformed or invalid run configuration.

    ``line`` is the 1-based line number when the error is tied to one,
    ``key`` the offending key when validation fails on a value.
    """

    def __init__(self, message, line=None, key=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
        self.key = key
