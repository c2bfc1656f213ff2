"""Exception types shared across the package."""


class DataError(ValueError):
    """Input data violates a precondition (bad CSV, unknown label, degenerate panel...)."""


class ConvergenceError(ArithmeticError):
    """An iterative numerical routine exhausted its iteration budget."""
