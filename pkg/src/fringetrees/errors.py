class FringeError(ValueError):
    """Base class for all library errors."""


class IdentityViolation(FringeError):
    pass


class EmptyInput(FringeError):
    pass


class NotABridge(FringeError):
    pass


class InvalidEncoding(FringeError):
    pass


class TargetTooLarge(FringeError):
    pass


class InvalidOrder(FringeError):
    pass


class SizeOutOfRange(FringeError):
    pass


class PrecisionLoss(FringeError):
    pass


class CountOutOfRange(FringeError):
    pass


class IncompatibleSize(FringeError):
    pass


class AttemptsExhausted(FringeError):
    pass


class InfeasibleTarget(FringeError):
    pass


class NonpositiveSigma(FringeError):
    pass


class NonpositiveInput(FringeError):
    pass


class EmptyHistogram(FringeError):
    pass


class DegenerateRange(FringeError):
    pass


class DegenerateSpread(FringeError):
    pass


class UnderspecifiedScenario(FringeError):
    pass


class LimitExceeded(FringeError):
    pass


class BudgetExceeded(FringeError):
    pass


class ConfigError(FringeError):
    pass
