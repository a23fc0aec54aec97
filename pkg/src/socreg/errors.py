"""Exception hierarchy shared across the package."""


class SocRegError(Exception):
    """Base class for all package errors."""


class BidError(SocRegError, ValueError):
    """A bid or storage asset violates its structural invariants."""


class EdcrError(BidError):
    """An operation requiring an EDCR bid received one that is not."""

    def __init__(self, message: str, failing: list[int] | None = None):
        super().__init__(message)
        self.failing = failing or []


class SocRangeError(SocRegError, ValueError):
    """A state-of-charge value left the bid's [E_1, E_{K+1}] range."""

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


class InstanceTooLarge(SocRegError):
    pass


class SolverError(SocRegError):
    """Raised when an optimization does not produce a usable solution."""

    def __init__(self, message: str, status: str | None = None, step: int | None = None):
        super().__init__(message)
        self.status = status
        self.step = step


class ConfigError(SocRegError):
    pass
