"""Exception hierarchy. Every error carries enough context to be reported by the CLI."""


class GenPolyError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ExprSyntaxError(GenPolyError, ValueError):
    exit_code = 2

    def __init__(self, message, position=None, expected=None):
        self.position = position
        self.expected = expected
        detail = message
        if position is not None:
            detail += f" at position {position}"
        if expected:
            detail += f" (expected {expected})"
        super().__init__(detail)


class ConstantTermError(ExprSyntaxError):
    """A subexpression with no occurrence of n, which would break p(0) = 0."""


class TieUndecidable(GenPolyError):
    exit_code = 3

    def __init__(self, message, expr=None, n=None):
        self.expr = expr
        self.n = n
        super().__init__(message)


class Undecidable(GenPolyError):
    """An interval comparison could not be resolved at the precision cap."""

    exit_code = 3


class UndecidableZero(Undecidable):
    pass


class SymbolicValueError(GenPolyError, TypeError):
    """Numeric evaluation requested for a coefficient with free symbols."""

    exit_code = 6


class NotGP(GenPolyError):
    exit_code = 4


class NotSGP(GenPolyError):
    exit_code = 4


class NotGoodShift(GenPolyError):
    exit_code = 6

    def __init__(self, m, expr=None):
        self.m = m
        self.expr = expr
        super().__init__(f"shift {m} is not good w.r.t. {expr}")


class SpacingViolation(GenPolyError):
    exit_code = 6


class DescentFailure(GenPolyError):
    exit_code = 6


class CapExceeded(GenPolyError):
    exit_code = 5


class WindowTooLarge(CapExceeded):
    pass


class LevelTooLarge(CapExceeded):
    pass


class ResolutionTooFine(CapExceeded):
    pass


class PreconditionError(GenPolyError, ValueError):
    exit_code = 6
