"""Exception types shared across the package."""


class InputError(ValueError):
    """Raised for malformed or inconsistent user input."""


class ConsistencyError(RuntimeError):
    """Raised when an internal numerical consistency check fails."""
