"""Exception types raised across the package.

Every error that the CLI maps to exit code 2 derives from
:class:`PhaseTomoError`; its class name is echoed to the user.
"""


class PhaseTomoError(Exception):
    """Base class for numeric and validation failures."""


class DimensionMismatch(PhaseTomoError, ValueError):
    pass


class NonUnitaryOperand(PhaseTomoError, ValueError):
    pass


class NonHermitianInput(PhaseTomoError, ValueError):
    """A density operator failed the Hermitian / trace-one checks."""


class NonPSDInput(PhaseTomoError, ValueError):
    """A density operator has an eigenvalue below the PSD tolerance."""


class DegenerateGround(PhaseTomoError):
    """The Harper ground level is (numerically) degenerate."""


class PointOutOfRange(PhaseTomoError, ValueError):
    pass


class NotAxisAligned(PhaseTomoError, ValueError):
    pass


class NoOddCoefficient(PhaseTomoError, ValueError):
    """Both line coefficients n1, n2 are even; no cat map reaches the line."""


class EmptyRegion(PhaseTomoError, ValueError):
    pass


class InvalidBudget(PhaseTomoError, ValueError):
    pass


class FilterFailed(PhaseTomoError):
    """Every filtering attempt missed the target peak."""

    def __init__(self, attempts, message=None):
        self.attempts = attempts
        super().__init__(message or f"filter missed the target peak in all {attempts} attempts")


class StateFileError(PhaseTomoError, ValueError):
    """A state or density-matrix file is malformed."""


class UnknownRequest(PhaseTomoError, ValueError):
    pass


class UnknownFigure(PhaseTomoError, ValueError):
    pass
