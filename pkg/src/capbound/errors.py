"""Exception types raised throughout capbound."""


class CapboundError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(CapboundError, ValueError):
    """Operand shapes or subsystem dimensions do not match."""


class LabelError(CapboundError, KeyError):
    """A subsystem label is unknown or duplicated."""

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class NotHermitianError(CapboundError, ValueError):
    """A matrix expected to be Hermitian is not, within tolerance."""


class InvalidStateError(CapboundError, ValueError):
    """An operator is not a density matrix (PSD with unit trace)."""


class InvalidChannelError(CapboundError, ValueError):
    """Kraus or Choi data does not describe a CPTP map."""


class ParameterError(CapboundError, ValueError):
    """A scalar parameter lies outside its admissible range."""


class DimensionGuardError(CapboundError, ValueError):
    """A PPT-based program was requested above the separability bound |X||Y| <= 6."""


class CovarianceError(CapboundError, ValueError):
    """A channel is not covariant with respect to the supplied representation."""


class SolverError(CapboundError, RuntimeError):
    """The SDP solver did not return an optimal solution."""

    def __init__(self, message, solution=None):
        super().__init__(message)
        self.solution = solution
