"""Shared exception types."""


class DecodeError(ValueError):
    """A bit stream is truncated, malformed, or not in canonical form."""


class ResourceLimitError(RuntimeError):
    """An exhaustive operation was requested beyond its configured size bound."""
