"""Exception hierarchy shared by all solvers and diagnostics."""


class LayeredGasError(Exception):
    pass


class InvalidArgument(LayeredGasError, ValueError):
    pass


class DomainError(LayeredGasError, ValueError):
    """Input outside the mathematical domain (non-positive pressure, density, ...)."""


class ConstructionFailure(LayeredGasError, RuntimeError):
    """A traveling-wave construction did not produce a homoclinic orbit.

    ``trace`` holds the phase-plane trajectory (columns xi, u, v) for forensics.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class NoSaddleError(ConstructionFailure):
    pass


class ConvergenceFailure(LayeredGasError, RuntimeError):
    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = history or []


class SolverAbort(LayeredGasError, RuntimeError):
    """Time integration stopped; ``state`` is the last good state and ``record`` the partial run."""

    def __init__(self, message, state=None, record=None, spectrum=None):
        super().__init__(message)
        self.state = state
        self.record = record
        self.spectrum = spectrum


class AmbiguousMeasurement(LayeredGasError, RuntimeError):
    pass
