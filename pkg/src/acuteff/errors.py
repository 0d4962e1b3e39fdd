"""Exception types raised across the package."""


class AcuteError(Exception):
    """Base class for all package errors."""


class NotPrime(AcuteError, ValueError):
    pass


class EvenCharacteristic(AcuteError, ValueError):
    pass


class ReduciblePolynomial(AcuteError, ValueError):
    pass


class FieldTooLarge(AcuteError, ValueError):
    pass


class FieldMismatch(AcuteError, ValueError):
    pass


class DivisionByZero(AcuteError, ZeroDivisionError):
    pass


class DimensionMismatch(AcuteError, ValueError):
    pass


class DegenerateTriple(AcuteError, ValueError):
    pass


class DuplicatePoint(AcuteError, ValueError):
    pass


class PrincipalCharacter(AcuteError, ValueError):
    pass


class AlphaNotNonResidue(AcuteError, ValueError):
    pass


class BudgetExceeded(AcuteError, RuntimeError):
    pass


class SpaceTooLarge(AcuteError, ValueError):
    pass
