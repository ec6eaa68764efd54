"""Exception types shared across the toolkit."""

from __future__ import annotations


class ParseError(ValueError):
    """A line of an input file could not be parsed."""

    def __init__(self, message: str, line_number: int | None = None, source: str | None = None):
        self.line_number = line_number
        self.source = source
        where = ""
        if source is not None:
            where += f"{source}:"
        if line_number is not None:
            where += f"{line_number}:"
        super().__init__(f"{where} {message}" if where else message)


class ValidationError(ValueError):
    """Parsed input violates a structural constraint (duplicates, bad values)."""


class EmptyResultError(ValueError):
    """An operation produced nothing to work with, e.g. an empty topic intersection."""
