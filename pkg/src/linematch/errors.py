"""Exception hierarchy shared by the whole package."""


class MatchingError(Exception):
    """Base class for every error raised by linematch."""


class InputError(MatchingError, ValueError):
    """Bad user-supplied data (points, cost text, parameters)."""


class ParseError(InputError):
    def __init__(self, message, line=None, column=None, token_index=None):
        super().__init__(message)
        self.line = line
        self.column = column
        self.token_index = token_index


class OddCountError(InputError):
    pass


class DuplicatePointError(InputError):
    pass


class NonFiniteError(InputError):
    pass


class ParameterError(InputError):
    pass


class CostValidationError(InputError):
    pass


class SizeError(InputError):
    """Instance too large for an exhaustive routine."""


class GenerationError(InputError):
    pass


class PreconditionError(MatchingError, ValueError):
    """An operation was called on arguments that violate its contract."""


class InvariantViolation(MatchingError, RuntimeError):
    """Internal consistency check failed. Always a bug, never silenced."""
