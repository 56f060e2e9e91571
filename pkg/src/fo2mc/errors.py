"""Exception hierarchy shared by all fo2mc components.

The CLI maps these onto process exit codes: parse/semantic problems exit
with 1, unsupported features with 2 and internal consistency violations
(which always indicate a bug) with 3.
"""


class Fo2mcError(Exception):
    """Base class for all errors raised by fo2mc."""


class ParseError(Fo2mcError):
    """Malformed input text; carries a 1-based line/column position."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        if line:
            message = f"{line}:{column}: {message}"
        super().__init__(message)


class SemanticError(Fo2mcError):
    """Well-formed input that violates a language rule (free variables,
    arity clashes, undeclared predicates, ...)."""


class UnsupportedFeatureError(Fo2mcError):
    """Input outside the supported fragment; never silently approximated."""


class InternalConsistencyError(Fo2mcError):
    """An invariant the engine guarantees was violated (negative model
    count, inexact division).  Signals a bug, not a user error."""


class OracleCapError(UnsupportedFeatureError):
    """The ground enumeration would exceed the oracle's assignment cap."""
