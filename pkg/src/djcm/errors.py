"""Exception hierarchy shared by all djcm modules."""


class DJCMError(Exception):
    """Base class for every error raised by the package."""


class NumericError(DJCMError):
    """A numerical procedure could not deliver the requested accuracy."""


class TruncationError(NumericError):
    """The truncated Fock space is too small for the requested state or operator."""


class EigenFailure(NumericError):
    """Hermitian eigendecomposition failed to converge."""


class ConvergenceError(NumericError):
    """Step-halving convergence gate of the time integrator failed."""


class DimensionMismatch(DJCMError, ValueError):
    pass


class InvalidCoupling(DJCMError, ValueError):
    pass


class ModeError(DJCMError, ValueError):
    """Operation is not defined for the parameter mode (driven/standard)."""


class UnsupportedInitialCondition(DJCMError, ValueError):
    pass


class DegenerateMean(DJCMError, ValueError):
    """Mandel Q requested for a state with (numerically) zero mean photon number."""


class NonPositiveMatrix(DJCMError, ValueError):
    pass


class WindowOutOfRange(DJCMError, ValueError):
    pass


class MissingStates(DJCMError, ValueError):
    pass


class RegimeError(DJCMError, ValueError):
    """Dispersive approximation requested outside |Delta| >= 10 g."""


class ConfigError(DJCMError, ValueError):
    pass
