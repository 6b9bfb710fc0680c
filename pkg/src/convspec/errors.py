"""Exception hierarchy shared by the numerical modules and the CLI."""


class ConvspecError(Exception):
    """Base class for all package errors."""


class InputError(ConvspecError, ValueError):
    """Malformed, inconsistent or non-finite input data (CLI exit code 2)."""


class GridMismatchError(InputError):
    """Two sampled functions live on different grids."""


class ConvergenceError(ConvspecError, ArithmeticError):
    """An iterative numerical procedure failed to converge (CLI exit code 3)."""

    def __init__(self, message, *, index=None, last_iterate=None, residual=None):
        super().__init__(message)
        self.index = index
        self.last_iterate = last_iterate
        self.residual = residual


class MultipleRootError(ConvergenceError):
    """Newton derivative vanished near a root; the eigenvalue looks multiple."""
