"""Exception types shared across the package."""


class NotPositiveDefiniteError(ValueError):
    """A matrix required to be Hermitian positive definite is not."""


class ConvergenceError(RuntimeError):
    """An iterative solver hit its iteration cap before reaching tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class DegenerateDataError(ValueError):
    """Input data carries no usable information (e.g. zero variance)."""


class DiagnosticUnavailableError(RuntimeError):
    """A diagnostic quantity cannot be computed from the fitted model."""


class TrainingFailureError(RuntimeError):
    """Network training diverged (non-finite loss)."""

    def __init__(self, message, epoch=None):
        super().__init__(message)
        self.epoch = epoch
