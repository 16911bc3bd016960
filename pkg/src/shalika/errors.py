"""Exception types shared across the package."""


class ShalikaError(Exception):
    """Base class for all package errors."""


class PrecisionExhausted(ShalikaError):
    """A result cannot be determined at the working precision."""


class DivisionByZero(ShalikaError, ZeroDivisionError):
    pass


class ZeroArgument(ShalikaError, ValueError):
    pass


class ConfigMismatch(ShalikaError, ValueError):
    """Two scalars built from different field configurations were mixed."""


class BadParams(ShalikaError, ValueError):
    pass


class NotInSubgroup(ShalikaError, ValueError):
    pass


class NotInProduct(ShalikaError, ValueError):
    """The matrix has no factorization s*p with s Shalika and p mirabolic."""


class Singular(ShalikaError, ValueError):
    pass


class TruncationCapExceeded(ShalikaError):
    """Boundary shells of a truncated integral did not vanish before the radius cap."""


class LengthMismatch(ShalikaError, ValueError):
    pass


class EnumerationBudgetExceeded(ShalikaError):
    pass


class BudgetExceeded(ShalikaError):
    pass


class WindowTooSmall(ShalikaError):
    pass


class NormalizationZero(ShalikaError):
    pass


class Indeterminate(ShalikaError):
    """Raised internally when a value cannot be determined (e.g. outside S*P)."""
