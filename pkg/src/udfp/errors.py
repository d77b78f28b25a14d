"""Exception types shared across the package."""


class DataError(ValueError):
    """Raised for malformed, inconsistent, or incomplete price data.

    Carries enough context (line number, date, ticker) in the message to
    locate the offending input.
    """


class InsufficientHistoryError(ValueError):
    """Raised when a factor needs more history than is available."""

    def __init__(self, message, period=None, required=None):
        super().__init__(message)
        self.period = period
        self.required = required


class ConvergenceError(RuntimeError):
    """Raised when an iterative solver exhausts its iteration budget.

    The best iterate found so far is attached so callers can inspect or
    reuse it.
    """

    def __init__(self, message, best_point=None, best_objective=None, iterations=None):
        super().__init__(message)
        self.best_point = best_point
        self.best_objective = best_objective
        self.iterations = iterations
