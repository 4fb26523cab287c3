"""Exception hierarchy shared by every geotherm module."""

from __future__ import annotations


class GeothermError(Exception):
    """Base class; ``exit_code`` is used by the command line front end."""

    exit_code = 1


class DomainError(GeothermError, ValueError):
    exit_code = 3


class NotPositiveDefinite(DomainError):
    pass


class NotSymmetric(DomainError):
    pass


class NotInImage(DomainError):
    pass


class NotSymplectic(DomainError):
    pass


class NotKahler(DomainError):
    pass


class UnknownModel(DomainError, KeyError):
    pass


class OutsideCone(DomainError):
    pass


class OutsideDisk(DomainError):
    pass


class OutsideDomain(DomainError):
    pass


class DegenerateTemperatures(OutsideCone):
    pass


class SingularMomentum(DomainError):
    pass


class SingularMetric(DomainError):
    pass


class NoConvergence(GeothermError, ArithmeticError):
    exit_code = 4


class BudgetExhausted(NoConvergence):
    pass


class DivergenceDetected(NoConvergence):
    # a diverging partition integral means the temperature left the cone
    exit_code = 3


class EnvelopeTooTight(NoConvergence):
    pass


class StepTooLarge(NoConvergence):
    pass
