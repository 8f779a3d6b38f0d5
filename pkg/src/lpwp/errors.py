"""Exception hierarchy shared by every module.

Anything derived from :class:`LpwpError` is an *input* problem (bad file,
bad annotation, bad expression) and maps to exit code 1 in the CLI.
"""

from __future__ import annotations


class LpwpError(Exception):
    """Base class for all recoverable input errors."""


class AnnotationError(LpwpError, ValueError):
    """A span or tag sequence is inconsistent with its text."""


class BioError(AnnotationError):
    """Malformed BIO tag sequence."""

    def __init__(self, index: int, reason: str):
        self.index = index
        super().__init__(f"token {index}: {reason}")


class DatasetError(LpwpError, ValueError):
    """A dataset file could not be loaded."""

    def __init__(self, message: str, *, source: str | None = None, record: int | None = None):
        self.source = source
        self.record = record
        where = []
        if source is not None:
            where.append(str(source))
        if record is not None:
            where.append(f"record {record}")
        prefix = ":".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class IRSyntaxError(LpwpError, ValueError):
    """Positioned error raised by the meaning-representation parser."""

    def __init__(self, message: str, line: int, column: int):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


class UnknownDirectionError(LpwpError, KeyError):
    def __init__(self, phrase: str):
        self.phrase = phrase
        super().__init__(phrase)

    def __str__(self) -> str:
        return f"unknown direction {self.phrase!r}"


class CanonicalizationError(LpwpError, ValueError):
    """A declaration has no canonical form (e.g. constant versus constant)."""


class DimensionError(LpwpError, ValueError):
    pass


class IterationLimitError(RuntimeError):
    """The simplex method hit its iteration cap.

    Deliberately not an :class:`LpwpError`: it signals numerical trouble in
    the solver, not a bad input.
    """

    def __init__(self, iterations: int):
        self.iterations = iterations
        super().__init__(f"simplex iteration limit reached after {iterations} pivots")
