"""Shared exception hierarchy.

Every domain error raised by this package derives from DrillforgeError so
callers (CLI, HTTP layer) can map failures to exit codes / status codes
without enumerating modules.
"""


class DrillforgeError(Exception):
    """Base class for all drillforge domain errors."""

    code = "error"


class ValidationError(DrillforgeError):
    """Bad input value or violated precondition."""

    code = "validation"


class NotFoundError(DrillforgeError):
    """Referenced entity does not exist."""

    code = "not_found"


class ConflictError(DrillforgeError):
    """Operation conflicts with current state (duplicate, out of order)."""

    code = "conflict"
