"""Exception types raised across the package."""


class MechgapError(Exception):
    """Base class for all package errors."""


class DomainError(MechgapError, ValueError):
    """An argument lies outside the domain of a function."""


class ConvergenceError(MechgapError, ArithmeticError):
    """A series, quadrature, root finder or optimizer did not converge."""


class NotTriangularError(MechgapError, ValueError):
    """The operation needs an instance made only of triangular buyers."""


class IrregularDistributionError(MechgapError, ValueError):
    """The operation needs regular value distributions."""
