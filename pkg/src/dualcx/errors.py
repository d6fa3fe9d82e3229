"""Exception hierarchy shared by all modules.

The split matters for the command line tool, which maps these onto exit
codes: usage and malformed-input problems exit 2, numeric guard rejections
exit 3, and verdict failures exit 1.
"""

from __future__ import annotations


class DualcxError(Exception):
    """Base class for all library errors."""


class ValidationError(DualcxError):
    """Structural data is inconsistent (bad ids, broken coherence, ...)."""


class GuardError(DualcxError):
    """A numeric genericity guard rejected the input configuration.

    Carries a short machine-readable ``reason`` naming the guard.
    """

    def __init__(self, reason: str, message: str | None = None):
        self.reason = reason
        super().__init__(message or reason)


class RootFindingError(DualcxError):
    """The simultaneous root finder failed to converge."""


class BudgetError(DualcxError):
    """A bounded search was invoked with a non-positive budget."""
