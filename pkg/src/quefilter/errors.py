"""Exception hierarchy.

Everything raised on bad data or a failed run derives from ``QueError`` so the
CLI can map it to exit code 1.
"""


class QueError(Exception):
    pass


class ZeroMass(QueError):
    pass


class DimensionMismatch(QueError):
    pass


class InvalidEpsilon(QueError):
    pass


class ConfigError(QueError):
    pass


class TooLarge(QueError):
    pass


class NegativeScore(QueError):
    pass


class InvalidB(QueError):
    pass


class NonTermination(QueError):
    pass


class PruneFailed(QueError):
    pass


class NonConvergence(QueError):
    pass


class DegenerateCovariance(QueError):
    pass


class SingularReference(QueError):
    pass


class OneClassOnly(QueError):
    pass


class DataFormatError(QueError):
    pass
