"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class RciError(Exception):
    exit_code = 5


# Input / configuration problems (exit 2)

class ConfigError(RciError):
    exit_code = 2


class DimensionMismatch(ConfigError):
    pass


class AssumptionViolation(ConfigError):
    pass


class StructureRequired(ConfigError):
    pass


class UnsupportedSize(ConfigError):
    pass


class IndexOutOfRange(ConfigError):
    pass


class WrongBlockKind(ConfigError):
    pass


class NoApplicableBlock(RciError):
    exit_code = 3


class DimensionUnsupported(RciError):
    exit_code = 4


# Runtime numerical failures (exit 5)

class NumericalError(RciError):
    exit_code = 5


class SingularMatrix(NumericalError):
    pass


class UnboundedSet(NumericalError):
    pass


class DegenerateDirection(NumericalError):
    pass


class ResidualTooLarge(NumericalError):
    pass


class ComplexityCap(NumericalError):
    pass


class UpperBoundNotEmpty(NumericalError):
    pass


class MonotonicityViolation(NumericalError):
    pass


class InfeasibleOmega(NumericalError):
    pass


class DegenerateProjection(NumericalError):
    pass


class BoundError(NumericalError):
    pass


class NonPositiveEigenvalue(BoundError):
    pass


class NonNegativeEigenvalue(BoundError):
    pass


class ZeroEigenvalueUnsupported(BoundError):
    pass


class NonPositiveDenominator(BoundError):
    pass


class FormulaMismatch(BoundError):
    pass


class AsymmetricW(BoundError):
    pass


class IrrationalAngle(BoundError):
    pass
