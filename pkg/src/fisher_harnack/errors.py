"""Exception types raised across the package."""


class HarnackError(Exception):
    """Base class for all package errors."""


class NegativeRadicand(HarnackError, ValueError):
    pass


class NoFeasibleEpsPrime(HarnackError, ValueError):
    pass


class UnsupportedDimension(HarnackError, ValueError):
    pass


class NonpositiveTime(HarnackError, ValueError):
    pass


class UnsupportedFamily(HarnackError, ValueError):
    pass


class OutOfRegime(HarnackError, ValueError):
    pass


class InfeasibleParams(HarnackError, ValueError):
    pass


class StabilityViolation(HarnackError, RuntimeError):
    pass


class RangeViolation(HarnackError, ValueError):
    pass


class NonpositiveField(HarnackError, ValueError):
    pass


class InsufficientSnapshots(HarnackError, ValueError):
    pass


class MissingSnapshot(HarnackError, KeyError):
    pass


class RadiusOutOfRange(HarnackError, ValueError):
    pass


class IntegrationFailure(HarnackError, RuntimeError):
    pass


class BracketFailure(HarnackError, RuntimeError):
    pass


class DegenerateInterval(HarnackError, ValueError):
    pass


class PairTooClose(HarnackError, ValueError):
    """Time separation of a pair is below what the trajectory resolves."""
