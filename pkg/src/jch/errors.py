"""Exception types shared across the package."""


class JCHError(Exception):
    """Base class for all package errors."""


class ParameterError(JCHError, ValueError):
    """An input parameter violates its domain.

    ``field`` names the offending parameter so callers (and the CLI) can
    report it verbatim.
    """

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(message)


class TruncationError(JCHError, ArithmeticError):
    """The sideband series could not meet its tail bound within ``max_terms``."""


class ConvergenceError(JCHError, ArithmeticError):
    """A numerical procedure did not converge within its budget."""


class StateError(JCHError, ValueError):
    """A density matrix failed a physicality check (hermiticity, trace, PSD)."""
