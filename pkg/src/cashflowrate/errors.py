"""Exception hierarchy.

Everything raised on purpose by the package derives from :class:`AccountsError`.
Validation problems additionally derive from :class:`ValueError`; I/O problems
from :class:`OSError`. The CLI maps the two families to distinct exit codes.
"""


class AccountsError(Exception):
    """Base class for all package errors."""


class ValidationError(AccountsError, ValueError):
    """Input or configuration is not acceptable."""


class InvalidObservation(ValidationError):
    pass


class NonPositiveCapital(ValidationError):
    pass


class NonPositiveConsumption(ValidationError):
    pass


class DuplicateYear(ValidationError):
    pass


class EmptyDerivation(ValidationError):
    pass


class MalformedHeader(ValidationError):
    pass


class InvalidConversionFactor(ValidationError):
    pass


class GeneratorInfeasible(ValidationError):
    pass


class TransferImbalance(ValidationError):
    pass


class IdentityViolation(ValidationError):
    """An accounting identity failed; ``equation`` names which one."""

    def __init__(self, equation, message=""):
        self.equation = equation
        super().__init__(f"{equation}: {message}" if message else equation)


class DegenerateEconomy(ValidationError):
    pass


class UnsupportedFormat(ValidationError):
    pass


class NoOverlap(ValidationError):
    pass


class InsufficientSeries(ValidationError):
    pass


class SchemaMismatch(ValidationError):
    """An intermediate artifact file has the wrong schema header."""


class IoFailure(AccountsError, OSError):
    pass
