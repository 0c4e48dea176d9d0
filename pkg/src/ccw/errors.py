"""Shared exception types.

Checkers never raise on a *failed* property; they return a failing
verdict with a witness.  Exceptions are reserved for broken inputs:
violated preconditions, undecidable requests (insufficient action
domain), size caps and malformed documents.
"""

from __future__ import annotations


class CcwError(Exception):
    """Base class for all errors raised by this package."""


class PreconditionError(CcwError):
    """An operation's stated precondition does not hold for the input."""


class DomainError(CcwError):
    """A partial action/map is undefined somewhere the operation needs it.

    Carries a witness naming the missing application.
    """

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class SizeCapError(CcwError):
    """An enumeration would exceed the configured size cap."""


class SchemaError(CcwError):
    """A JSON document does not match the expected schema."""
