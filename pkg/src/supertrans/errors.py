"""Exception hierarchy shared by every module."""

from __future__ import annotations


class SuperTransError(Exception):
    """Base class for all library errors."""


class InputError(SuperTransError):
    """Malformed or inconsistent input (maps to CLI exit code 2)."""


class ParseError(InputError):
    def __init__(self, message: str, pos: int | None = None, line: int | None = None, col: int | None = None):
        self.pos = pos
        self.line = line
        self.col = col
        where = ""
        if line is not None:
            where = f" at line {line}, column {col}"
        elif pos is not None:
            where = f" at position {pos}"
        super().__init__(f"{message}{where}")


class UnknownVariableError(InputError):
    pass


class MissingBindingError(InputError):
    pass


class EvaluationError(SuperTransError):
    """Numeric evaluation left the domain of a function (sqrt of a negative, 0^-1, ...)."""


class ContextMismatchError(InputError):
    pass


class ParityError(InputError):
    pass


class ArityError(InputError):
    pass


class DomainMismatchError(InputError):
    pass


class OutOfBoxError(InputError):
    pass


class NotOnFiberError(InputError):
    pass


class NoChartError(InputError):
    pass


class InvertibilityError(InputError):
    pass


class SceneError(InputError):
    """Semantic error in a scene file; the message names the declaration."""


class NotAffineError(SuperTransError):
    pass


class NonTransversalError(SuperTransError):
    pass


class OracleDisagreementError(SuperTransError):
    """Two independent criteria returned different verdicts (CLI exit code 3)."""
