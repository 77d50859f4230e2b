"""Exception types raised across the package."""


class VlcMimoError(ValueError):
    """Base class for all package errors."""


class InvalidParameter(VlcMimoError):
    pass


class InvalidMessage(VlcMimoError):
    pass


class NotACodeword(VlcMimoError):
    pass


class CapacityExceeded(VlcMimoError):
    pass


class InvalidPair(VlcMimoError):
    pass
