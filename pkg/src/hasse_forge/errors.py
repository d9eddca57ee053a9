"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class ResourceError(RuntimeError):
    """A computation would exceed its configured enumeration budget."""


class InvariantViolation(AssertionError):
    """An internal mathematical invariant failed; this indicates a bug."""
