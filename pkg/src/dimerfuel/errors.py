"""Exception types shared across the package."""


class InvalidStateError(ValueError):
    """Input does not describe a physical state (trace, positivity, bounds)."""


class AboveThresholdError(ValueError):
    """The cavity has no finite steady-state temperature for these parameters."""


class TruncationError(RuntimeError):
    """Population leaked into the top Fock levels; retry with a larger space."""

    def __init__(self, message, dim=None, leak=None):
        super().__init__(message)
        self.dim = dim
        self.leak = leak


class IntegrationError(RuntimeError):
    """The adaptive integrator failed to reach the requested tolerance."""


class InjectionBoundError(ValueError):
    """Requested phaseonium coherence violates the unitary-injection bound."""

    def __init__(self, message, max_eps):
        super().__init__(message)
        self.max_eps = max_eps


class ModelMismatchError(RuntimeError):
    """The injection generator is not well described by the two dissipators."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual
