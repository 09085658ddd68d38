"""Exception hierarchy shared by every ptbench module."""


class PTBenchError(Exception):
    """Base class for all errors raised by ptbench."""


class ValidationError(PTBenchError, ValueError):
    """Input does not satisfy a precondition (shape, finiteness, range)."""


class NumericalFailure(PTBenchError, ArithmeticError):
    """An iterative or factorization step failed to reach its tolerance.

    ``residual`` carries the best residual seen and ``index`` the offending
    pivot or iteration index, when one is meaningful.
    """

    def __init__(self, message, residual=None, index=None):
        super().__init__(message)
        self.residual = residual
        self.index = index


class NonDiagonalizableError(ValidationError):
    """Raised for Jordan-block input where a complete eigenbasis is required."""


class NoSymmetryError(PTBenchError):
    """The Hamiltonian admits no invertible antilinear symmetry."""
