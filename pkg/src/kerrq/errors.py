"""Exception hierarchy shared by all kerrq modules."""


class KerrqError(Exception):
    """Base class for every error raised by kerrq."""


class InvalidDimensionError(KerrqError, ValueError):
    pass


class InvalidParameterError(KerrqError, ValueError):
    pass


class NoBistabilityError(KerrqError, ValueError):
    pass


class PoleError(KerrqError, ValueError):
    pass


class PrecisionError(KerrqError, ArithmeticError):
    """Extended-precision budget exhausted.

    ``required_digits`` is the working precision that would have been needed,
    ``argument`` the series argument (|xi|^2 style) that triggered it.
    """

    def __init__(self, message, required_digits=None, argument=None):
        super().__init__(message)
        self.required_digits = required_digits
        self.argument = argument


class NearDegeneracyError(KerrqError):
    """Null space of the Liouvillian is numerically two-dimensional."""

    def __init__(self, message, eigenvalues, candidates):
        super().__init__(message)
        self.eigenvalues = eigenvalues
        self.candidates = candidates


class ConvergenceError(KerrqError, RuntimeError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class StiffnessError(KerrqError, RuntimeError):
    pass


class TruncationError(KerrqError):
    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class StateValidityError(KerrqError, ValueError):
    pass


class GridBudgetError(KerrqError):
    pass


class ConfigError(KerrqError, ValueError):
    pass
