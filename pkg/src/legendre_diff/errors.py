"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Invalid parameters, configuration or input data."""


class NumericalError(ArithmeticError):
    """An iterative or numerical procedure failed to produce a usable result."""
