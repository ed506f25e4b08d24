"""Exception types shared across the package."""


class SqueezeForgeError(Exception):
    """Base class for every package-specific error."""


class ProtocolError(SqueezeForgeError):
    """A frequency protocol is invalid (bad construction input or failed validation)."""


class PropagationError(SqueezeForgeError):
    """The ODE integrator failed to advance a segment within tolerance."""

    def __init__(self, message: str, segment_index: int | None = None):
        super().__init__(message)
        self.segment_index = segment_index


class NotPureError(SqueezeForgeError):
    """Covariances do not describe a pure Gaussian state."""


class TruncationError(SqueezeForgeError):
    """A Fock-space truncation left more probability mass outside than the budget allows."""


class ContractError(SqueezeForgeError):
    """Mismatched inputs, e.g. a trajectory that does not belong to the given protocol."""
