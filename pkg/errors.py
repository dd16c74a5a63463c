# errors.py
"""
Exception hierarchy for synccheck.

Every failure the tools can report on purpose derives from SyncCheckError,
so the CLI can turn any of them into exit code 2.
"""

from typing import Iterable, Optional


class SyncCheckError(Exception):
    """Base class for all synccheck errors."""


class ModelFormatError(SyncCheckError):
    """Malformed Kripke text (bad keyword, unknown name, duplicate state)."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class TotalityError(SyncCheckError):
    """A state has no successor, so some paths would be finite."""

    def __init__(self, states: Iterable[str]):
        self.states = list(states)
        super().__init__(
            "totality violation: no successors for " + ", ".join(self.states)
        )


class UnknownStateError(SyncCheckError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unknown state '{name}'")


class ParseError(SyncCheckError):
    """Formula syntax error with position and the tokens that would have fit."""

    def __init__(self, message: str, line: int, column: int, expected: Iterable[str] = ()):
        self.line = line
        self.column = column
        self.expected = sorted(set(expected))
        text = f"{message} at line {line}, column {column}"
        if self.expected:
            text += " (expected one of: " + ", ".join(self.expected) + ")"
        super().__init__(text)


class CapExceeded(SyncCheckError):
    """A resource cap was hit. This is never a verdict."""

    def __init__(self, what: str, cap: int):
        self.what = what
        self.cap = cap
        super().__init__(f"{what} exceeded cap of {cap}")


class SizeExceeded(SyncCheckError):
    def __init__(self, what: str, size: int, limit: int):
        self.size = size
        self.limit = limit
        super().__init__(f"{what} has size {size}, limit is {limit}")


class ReductionError(SyncCheckError):
    pass


class EmptyClause(ReductionError):
    def __init__(self, index: int):
        self.index = index
        super().__init__(f"clause {index} is empty")


class DimacsError(SyncCheckError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SameStateError(SyncCheckError, ValueError):
    """distinguish was asked to separate a state from itself."""

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"distinguish needs two different states, got '{name}' twice")
