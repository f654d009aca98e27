"""Planner-only fluents about the robot and object geometry."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from ..lang.ast import Const, Skolem
from ..lang.parser import fluent_text

Term = Const | Skolem


@dataclass(frozen=True)
class Holding:
    obj: Term

    def describe(self):
        return f"Holding({self.obj})"


@dataclass(frozen=True)
class HandEmpty:
    def describe(self):
        return "HandEmpty()"


@dataclass(frozen=True)
class Near:
    """The target is in view and within reach of the base (objects), or
    the base stands at the region's inspection pose (regions)."""

    target: Term

    def describe(self):
        return f"Near({self.target})"


@dataclass(frozen=True)
class Clear:
    """No other object cuts the line from the approach pose to ``obj``."""

    obj: Term

    def describe(self):
        return f"Clear({self.obj})"


@dataclass(frozen=True)
class PoseKnown:
    """Position covariance dominated by the grasp tolerance."""

    obj: Term

    def describe(self):
        return f"PoseKnown({self.obj})"


@dataclass(frozen=True)
class Observed:
    """The ``dim`` property of ``obj`` has low variance and the object's
    existence has been confirmed by a repeat detection."""

    obj: Term
    dim: str

    def describe(self):
        return f"Observed({self.obj}, {self.dim})"


DOMAIN_FLUENTS = (Holding, HandEmpty, Near, Clear, PoseKnown, Observed)


@lru_cache(maxsize=200_000)
def fluent_key(f) -> tuple:
    return (type(f).__name__, fluent_text(f))


def sorted_fluents(fluents) -> list:
    return sorted(fluents, key=fluent_key)
