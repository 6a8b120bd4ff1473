"""Exception types raised across the package."""


class CascadeError(Exception):
    """Base class for all package errors."""


class NonUnitary(CascadeError, ValueError):
    pass


class OddDimension(CascadeError, ValueError):
    pass


class NotPowerOfTwo(CascadeError, ValueError):
    pass


class DimensionMismatch(CascadeError, ValueError):
    pass


class TooManyQubits(CascadeError, ValueError):
    pass


class NotLowered(CascadeError, ValueError):
    pass


class InvalidBlockSize(CascadeError, ValueError):
    pass


class NonSingleQubitLayer(CascadeError, ValueError):
    pass


class InconsistentDimensions(CascadeError, ValueError):
    pass


class ShapeMismatch(CascadeError, ValueError):
    pass


class NonUnitModulus(CascadeError, ValueError):
    pass


class InvalidEpsilon(CascadeError, ValueError):
    pass


class GuardExceeded(CascadeError, ValueError):
    pass


class NotABijection(CascadeError, ValueError):
    pass


class NonAdjacent(CascadeError, ValueError):
    pass


class BadSpec(CascadeError, ValueError):
    pass
