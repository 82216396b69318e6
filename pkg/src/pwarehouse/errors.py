"""Exception hierarchy shared by every layer.

The HTTP service maps these onto its documented error codes; library users
catch ``WarehouseError`` or a specific subclass.
"""
from __future__ import annotations


class WarehouseError(Exception):
    """Base class for all errors raised by this package."""


class SchemaError(WarehouseError):
    """Schema document is malformed or internally inconsistent."""


class IngestError(WarehouseError):
    """A CSV batch was rejected; nothing from the batch was applied."""

    def __init__(self, message: str, row: int | None = None):
        super().__init__(message)
        self.row = row


class KindMismatchError(WarehouseError):
    """A value was compared against, or bound to, an incompatible kind."""


class UnknownNameError(WarehouseError):
    """A table, dimension, or attribute name does not exist in the schema."""


class PreferenceSyntaxError(WarehouseError):
    """A preference string does not match the preference grammar."""


class QuerySyntaxError(WarehouseError):
    """Query text failed to parse; ``position`` is a 0-based offset."""

    def __init__(self, message: str, position: int):
        super().__init__(message)
        self.position = position


class StaleViewError(WarehouseError):
    """The bound view predates the warehouse's latest ingestion."""


class ViewNotBuiltError(WarehouseError):
    """Personalization is on but no view exists for the effective profile."""


class AuthenticationError(WarehouseError):
    """Unknown user or bad credential (deliberately indistinguishable)."""


class DuplicateUserError(WarehouseError):
    """Registration attempted with a user id that is already taken."""


class MissingEntryError(WarehouseError):
    """A store lookup (profile, view, user) found nothing under the key."""
