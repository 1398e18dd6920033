"""Exception hierarchy shared by the evaluators."""


class CRSphereError(Exception):
    """Base class for every error raised by the package."""


class DomainError(CRSphereError, ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class RegimeError(DomainError):
    """The requested evaluator is not reliable in this parameter regime."""


class SingularityError(DomainError):
    """Evaluation at a pole of the requested function."""


class ConvergenceError(CRSphereError, ArithmeticError):
    """A numerical procedure could not meet its tolerance.

    ``achieved`` carries the best error estimate (or tail bound) reached
    before giving up.
    """

    def __init__(self, message, achieved=float("nan")):
        super().__init__(message)
        self.achieved = achieved


class TruncationError(ConvergenceError):
    """A series tail could not be certified below the tolerance."""


class QuadratureError(ConvergenceError):
    """Adaptive quadrature ran out of subdivisions."""


class RootFindingError(ConvergenceError):
    """Bracketing failed or the root could not be refined."""

    def __init__(self, message, achieved=float("nan"), signs=None):
        super().__init__(message, achieved)
        self.signs = signs
