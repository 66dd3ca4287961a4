"""Intervals on the real line.

The half-open convention [lo, hi) is used for all point counting; interval
containment checks are inclusive so that zero-length windows are valid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class Window:
    """An interval [lo, hi] with lo <= hi."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError(f"window bounds must be finite, got [{self.lo}, {self.hi}]")
        if self.lo > self.hi:
            raise ValueError(f"window requires lo <= hi, got [{self.lo}, {self.hi}]")

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def contains(self, other: "Window") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi


def as_window(value) -> Window:
    """Coerce a Window or a (lo, hi) pair into a Window."""
    if isinstance(value, Window):
        return value
    lo, hi = value
    return Window(float(lo), float(hi))
