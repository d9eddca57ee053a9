"""Prime specialization solver for diagonal conic and quadric bundles."""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import DomainError, InvariantViolation, ResourceError

__all__ = ["__version__", "DomainError", "InvariantViolation", "ResourceError"]
