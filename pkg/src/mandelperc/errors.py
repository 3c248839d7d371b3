"""Shared exception types.

Every error that callers are expected to handle carries a short stable
``code`` so the CLI can map failures to exit codes and tests can pin the
failure mode without string-matching messages.
"""

from __future__ import annotations


class MandelpercError(Exception):
    """Base class for all package errors."""

    code = "error"

    def __init__(self, message: str, code: str | None = None) -> None:
        super().__init__(message)
        if code is not None:
            self.code = code


class ValidationError(MandelpercError):
    """Rejected input: bad system definition, config, or flag values."""

    code = "validation"


class BudgetError(MandelpercError):
    """A requested computation exceeds its memory or enumeration budget.

    ``required`` describes the budget that would be needed.
    """

    code = "budget"

    def __init__(self, message: str, required: str | None = None) -> None:
        super().__init__(message)
        self.required = required


class CertificateError(MandelpercError):
    """A serialized certificate failed replay verification."""

    code = "certificate"


class ConsistencyError(MandelpercError):
    """Internal invariant violation; indicates a bug, not bad input."""

    code = "consistency"
