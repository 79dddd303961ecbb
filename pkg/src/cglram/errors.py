"""Exception types raised across the package."""


class CglramError(Exception):
    """Base class for all package errors."""


class NonSquare(CglramError, ValueError):
    pass


class NonFinite(CglramError, ValueError):
    pass


class RankOutOfRange(CglramError, ValueError):
    pass


class ShapeMismatch(CglramError, ValueError):
    pass


class EmptyStack(CglramError, ValueError):
    pass


class TooManyClusters(CglramError, ValueError):
    pass


class ConvergenceFailure(CglramError, RuntimeError):
    pass


class UnknownMethod(CglramError, ValueError):
    pass


class InvalidRatio(CglramError, ValueError):
    pass


class InvalidSpec(CglramError, ValueError):
    pass


# file-format errors
class BadMagic(CglramError, ValueError):
    pass


class TruncatedFile(CglramError, ValueError):
    pass


class DimensionOverflow(CglramError, ValueError):
    pass


class IoFailure(CglramError, OSError):
    pass
