"""Exception and warning types raised across the package."""


class PacketScatterError(Exception):
    """Base class for all package errors."""


class InvalidParameter(PacketScatterError, ValueError):
    pass


class NonConservedMomentum(PacketScatterError, ValueError):
    pass


class BelowThreshold(PacketScatterError, ValueError):
    pass


class OutOfDomain(PacketScatterError, ValueError):
    pass


class NormalizationFailure(PacketScatterError):
    pass


class NumericalFailure(PacketScatterError):
    """Parent of the failures the CLI maps to exit status 2."""


class QuadratureNonConvergence(NumericalFailure):
    pass


class NonConvergence(NumericalFailure):
    pass


class NegativeValueBeyondError(NumericalFailure):
    pass


class GridTooCoarse(NumericalFailure):
    pass


class AliasingDetected(NumericalFailure):
    pass


class WignerGradientUnstable(NumericalFailure):
    pass


class DegenerateDipole(UserWarning):
    """Issued when an asymmetry is requested for an in-state without a dipole."""
