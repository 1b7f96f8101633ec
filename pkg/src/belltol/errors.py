"""Exception hierarchy shared by all belltol modules."""


class BelltolError(Exception):
    """Base class for all belltol errors."""


class DomainError(BelltolError, ValueError):
    """A parameter lies outside the documented domain of an operation."""


class ValidationError(BelltolError, ValueError):
    """Matrix, state, measurement or distribution data violates an invariant."""


class DegenerateFunctionalError(DomainError):
    """The functional's LHV constant is zero, so violation ratios are undefined."""


class UnsupportedFunctionalError(BelltolError):
    """The functional is outside the class an algorithm can optimize over."""


class ResourceCapError(BelltolError):
    """A configured size cap (dimension, enumeration, LP) would be exceeded."""
