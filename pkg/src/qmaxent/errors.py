"""Exception hierarchy.  The CLI maps these onto exit codes."""


class QMaxEntError(Exception):
    """Base class for all library errors."""


class DomainError(QMaxEntError, ValueError):
    """An argument lies outside the domain of the operation."""


class InfeasibleError(DomainError):
    """The constraint set is empty (e.g. U outside (0, e_max))."""


class ConvergenceError(QMaxEntError, RuntimeError):
    """An iterative method did not reach its tolerance."""


class BracketError(ConvergenceError):
    """A root could not be bracketed; signals a malformed problem."""


class DegenerateFitError(QMaxEntError, ValueError):
    """Too little data for a meaningful least-squares fit."""


class InfiniteTemperature(QMaxEntError, ArithmeticError):
    """Raised when the structural parameter is exactly zero."""
