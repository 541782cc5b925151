"""Branch selection for the multivalued discrete maps."""

from __future__ import annotations

from enum import Enum

__all__ = ["BranchPolicy"]


class BranchPolicy(str, Enum):
    """Which real root a discrete step keeps when several exist.

    ``CONTINUITY`` keeps the root closest to the current state. ``SMALLEST``
    and ``LARGEST`` rank roots by a system-specific size: the norm
    ``q1^2 + q2^2`` for the Suslov top, ``|sin(dtheta)|`` for the sleigh.
    """

    CONTINUITY = "continuity"
    SMALLEST = "smallest"
    LARGEST = "largest"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            names = ", ".join(p.value for p in cls)
            raise ValueError(f"unknown branch policy {value!r}; expected one of {names}") from None
