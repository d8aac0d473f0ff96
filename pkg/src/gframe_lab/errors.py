"""Exception hierarchy for gframe_lab."""


class GFrameLabError(Exception):
    """Base class for every error raised by this package."""


class NotSquare(GFrameLabError, ValueError):
    pass


class NotHermitian(GFrameLabError, ValueError):
    pass


class NotPositive(GFrameLabError, ValueError):
    """An eigenvalue fell below the floor required by a functional calculus call."""


class ShapeMismatch(GFrameLabError, ValueError):
    pass


class DimensionMismatch(GFrameLabError, ValueError):
    pass


class SpaceMismatch(GFrameLabError, ValueError):
    """Two objects live on different discretized measure spaces."""


class UnknownNode(GFrameLabError, KeyError):
    pass


class BadInterval(GFrameLabError, ValueError):
    pass


class NotOrthonormal(GFrameLabError, ValueError):
    pass


class BadControllers(GFrameLabError, ValueError):
    pass


class NonCommutingControllers(GFrameLabError, ValueError):
    """(PQ)^(1/2) was requested but P and Q do not commute."""


class BesselPreconditionFailed(GFrameLabError, ValueError):
    pass


class SingularFrameOperator(GFrameLabError, ValueError):
    pass


class KernelViolation(GFrameLabError, ValueError):
    pass


class NotLeftInverse(GFrameLabError, ValueError):
    pass


class NotDual(GFrameLabError, ValueError):
    pass


class FormatError(GFrameLabError, ValueError):
    """A scenario or report file is truncated, malformed or has the wrong version."""
