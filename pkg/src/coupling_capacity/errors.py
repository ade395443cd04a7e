"""Exception hierarchy shared by every module of the package."""


class CapacityError(Exception):
    """Base class for all errors raised by :mod:`coupling_capacity`."""


class ValidationError(CapacityError, ValueError):
    """An input violates a documented invariant (shape, Hermiticity, trace...)."""


class PreconditionError(ValidationError):
    """An input is well formed but outside the domain an operation is defined on."""


class SolverFailure(CapacityError, RuntimeError):
    """An iterative routine did not reach its target accuracy."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class InconsistencyError(CapacityError):
    """Two independent computations that must agree did not."""
