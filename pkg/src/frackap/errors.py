"""Exception hierarchy shared by all modules."""


class FrackapError(Exception):
    """Base class for library errors."""


class DomainError(FrackapError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class UnsupportedCaseError(FrackapError, ValueError):
    """Index signature or configuration the library does not handle."""


class ShapeError(FrackapError, ValueError):
    """Grids or arrays that do not fit together."""


class StepTooLargeError(FrackapError, ValueError):
    """Finite-difference stencil would leave the domain."""


class NonConvergenceError(FrackapError, ArithmeticError):
    """Quadrature or series failed to stabilise.

    ``last_values`` holds the last two estimates when they are available.
    """

    def __init__(self, message, last_values=None):
        super().__init__(message)
        self.last_values = last_values


class CoverageError(FrackapError, ValueError):
    """Atom or evaluation point outside the grid."""


class DegenerateSetError(FrackapError, ValueError):
    """All capacity columns vanish on the grid."""


class StagnationError(FrackapError, ArithmeticError):
    """Optimiser stopped making progress."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
