"""Exception hierarchy shared by every module of the package."""


class QKDError(Exception):
    """Base class for all errors raised by hpcs_qkd."""


class DomainError(QKDError, ValueError):
    """An argument lies outside the domain of the operation."""


class ConfigurationError(QKDError, ValueError):
    """A parameter set violates one of its invariants."""


class UnsupportedFamilyError(ConfigurationError):
    """The operation is not defined for the given source family."""


class TruncationError(QKDError, ArithmeticError):
    """A truncated series still had a non-negligible last term."""


class CannotBoundError(QKDError, ArithmeticError):
    """A decoy estimator has no usable input (e.g. a zero yield bound)."""


class NotFoundError(QKDError, LookupError):
    """A search bracket contained no solution."""
