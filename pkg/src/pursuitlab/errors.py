"""Exception hierarchy shared by every module."""


class PursuitLabError(Exception):
    pass


class DomainError(PursuitLabError, ValueError):
    """A point does not belong to the space it is used with."""


class UnreachableError(PursuitLabError):
    """No finite-length geodesic joins two points inside the space."""


class SpeedViolation(PursuitLabError, ValueError):
    """A trajectory moves faster than unit speed on some interval."""

    def __init__(self, message, t0=None, t1=None):
        super().__init__(message)
        self.t0 = t0
        self.t1 = t1


class RangeError(PursuitLabError, ValueError):
    pass


class UsageError(PursuitLabError, ValueError):
    pass


class StrategyFault(PursuitLabError):
    """A strategy broke its contract (bad duration, speed, membership, invariant)."""


class ResourceError(PursuitLabError):
    pass


class ScenarioError(PursuitLabError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
