"""Exception hierarchy shared by the library and the CLI."""


class RscapError(Exception):
    """Base class for all errors raised by :mod:`rscap`."""


class DomainError(RscapError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConfigError(RscapError, ValueError):
    """Invalid configuration (node counts, tolerances, unknown identifiers)."""


class EvaluationError(RscapError, ArithmeticError):
    """An integrand produced a non-finite value at a quadrature node."""


class NumericalResolutionError(RscapError, RuntimeError):
    """A root is predicted analytically but lies beyond the numeric range.

    Raised by the saddle point solver when bracket expansion exhausts
    ``max_bracket`` while the tail criterion still predicts a root.
    """

    def __init__(self, message, alpha=None, kappa=None):
        super().__init__(message)
        self.alpha = alpha
        self.kappa = kappa
