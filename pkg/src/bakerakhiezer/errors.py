"""Error hierarchy. Every error carries a stable ``kind`` string used by the CLI."""


class BAError(Exception):
    """Base class for all package errors."""

    @property
    def kind(self) -> str:
        return type(self).__name__


class IntegralityViolation(BAError):
    pass


class UnsupportedFamily(BAError):
    pass


class OverflowRisk(BAError):
    pass


class DivideByZero(BAError, ZeroDivisionError):
    pass


class PoleAtEvaluationPoint(BAError):
    pass


class DenominatorOverflow(BAError):
    pass


class NotDivisible(BAError):
    """Raised by exact binomial division; ``residue_class`` is the failing class."""

    def __init__(self, msg, residue_class=None):
        super().__init__(msg)
        self.residue_class = residue_class


class NonIntegerK(BAError):
    pass


class ToleranceUnreachable(BAError):
    pass


class NotQuasiMinuscule(BAError):
    pass


class WrongCase(BAError):
    pass


class NormalizationDivideByZero(BAError):
    pass


class SolutionSpaceNotOneDimensional(BAError):
    def __init__(self, msg, dimension=None):
        super().__init__(msg)
        self.dimension = dimension


class PoleAtLambda(BAError):
    def __init__(self, msg, factor=None):
        super().__init__(msg)
        self.factor = factor


class EigenvalueCollision(BAError):
    pass


class NotDefinedAtParameters(BAError):
    pass


class NonGenericXi(BAError):
    pass


class NoOperatorAtDepth(BAError):
    pass


class EllNotAdmissible(BAError):
    pass
