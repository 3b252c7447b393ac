"""Exception types shared across the toolkit.

Every frontend error carries a source position so that messages always
name a line and column.
"""

from __future__ import annotations


class OuplError(Exception):
    """Base class for all toolkit errors."""


class SourceError(OuplError):
    """An error anchored at a position in a model source file."""

    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.message = message
        self.line = line
        self.col = col
        super().__init__(self.__str__())

    def __str__(self) -> str:
        if self.line:
            return f"line {self.line}, col {self.col}: {self.message}"
        return self.message


class LexError(SourceError):
    pass


class ParseError(SourceError):
    def __init__(self, message: str, line: int = 0, col: int = 0, expected: tuple = ()):
        self.expected = tuple(expected)
        if self.expected:
            message = f"{message} (expected one of: {', '.join(self.expected)})"
        super().__init__(message, line, col)


class ValidationError(SourceError):
    pass


class CodegenError(OuplError):
    """Compilation refused (e.g. Gibbs on a non-eligible variable)."""


class BuildError(OuplError):
    """Host toolchain invocation failed; carries the toolchain diagnostics."""


class EnumerationRefused(OuplError):
    """enumerate_exact cannot handle this model (continuous or unbounded)."""


class RuntimeFault(OuplError):
    """Internal consistency violation in an inference run (a bug, not user error)."""


class ParamDomainError(OuplError):
    """Distribution parameters outside their domain (e.g. non-positive variance)."""


class InfeasibleEvidence(OuplError):
    """World construction could not satisfy the evidence."""
