"""Exception types raised across the package."""


class CavcalError(Exception):
    """Base class for all package errors."""


class DegenerateArgument(CavcalError, ValueError):
    """Argument sits at a point where the quantity is undefined (e.g. A = lambda*I)."""


class NonpositiveDeterminant(CavcalError, ValueError):
    pass


class NotARotation(CavcalError, ValueError):
    pass


class NoBracket(CavcalError, RuntimeError):
    pass


class ParamRange(CavcalError, ValueError):
    pass


class GridMismatch(CavcalError, ValueError):
    pass


class EmptyGrid(CavcalError, ValueError):
    pass


class DegenerateGrid(CavcalError, ValueError):
    pass


class OrderViolation(CavcalError, ValueError):
    pass


class NegativeWeight(CavcalError, ValueError):
    pass
