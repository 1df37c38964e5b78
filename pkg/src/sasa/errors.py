"""Exception types shared across the package."""

from __future__ import annotations


class ContractViolation(RuntimeError):
    """An internal precondition that upstream code guarantees was broken."""


class NumericError(ArithmeticError):
    """A computation produced a non-finite value."""


class UnsupportedLanguageError(ValueError):
    pass


class AlignmentError(ValueError):
    def __init__(self, token_index: int, message: str):
        super().__init__(f"token {token_index}: {message}")
        self.token_index = token_index


class FormatError(ValueError):
    """A serialized artifact has a malformed header or body."""
