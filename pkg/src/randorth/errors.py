"""Exception hierarchy shared by all modules."""


class RandOrthError(Exception):
    """Base class for package errors."""


class UnsupportedRangeError(RandOrthError, ValueError):
    """Dimension, degree or set descriptor outside what is implemented."""


class WeightDomainError(RandOrthError, ValueError):
    """The weight expression evaluated to a non-finite value."""


class PrecisionInsufficientError(RandOrthError, ArithmeticError):
    """Triangular factor became numerically singular at the working precision."""

    def __init__(self, message, column=None):
        super().__init__(message)
        self.column = column


class ExactnessError(RandOrthError, ValueError):
    """A quadrature is not exact enough for the requested degree."""


class DegeneratePolynomialError(RandOrthError, ValueError):
    pass


class RootFindingError(RandOrthError, ArithmeticError):
    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


class GridMismatchError(RandOrthError, ValueError):
    pass


class SchemaError(RandOrthError, ValueError):
    """Invalid experiment configuration; ``errors`` lists offending fields."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))
