"""Shared exception base for the service layer."""


class TVGroupsError(Exception):
    """Base exception for all library errors."""


class InputError(TVGroupsError):
    """Raised for malformed user input; the CLI maps it to exit code 2."""


class LimitExceededError(TVGroupsError):
    """Raised when a configured search cap is exceeded; the CLI maps it to exit code 1."""
