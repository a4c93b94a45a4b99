"""Exception hierarchy shared by every defdirac module."""


class DefDiracError(Exception):
    """Base class for all library errors."""


class InvalidParameter(DefDiracError, ValueError):
    """A physical constant, deformation parameter or quantum number is out of range."""


class SupercriticalCoupling(DefDiracError, ValueError):
    """k^2 <= alpha_bar^2, so the Lambda eigenvalue would be imaginary."""


class NonPositivePrincipal(DefDiracError, ValueError):
    pass


class DeformationRequired(DefDiracError, ValueError):
    """The hyperbolic (Eckart) form needs nu > 0; use the nu = 0 formulas instead."""


class ComplexRoots(DefDiracError, ArithmeticError):
    pass


class NoBoundState(DefDiracError):
    pass


class MassParameterTooLarge(DefDiracError, ValueError):
    pass


class DomainError(DefDiracError, ValueError):
    pass


class InvalidGrid(DefDiracError, ValueError):
    pass


class ConvergenceFailure(DefDiracError, RuntimeError):
    pass


class BracketingFailure(DefDiracError, RuntimeError):
    pass
