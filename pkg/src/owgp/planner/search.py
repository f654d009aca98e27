"""Uniform-cost regression search over sets of subgoal fluents.

The engine is domain-free: callers supply a satisfaction test for subgoal
sets and a successor function that regresses a set through ground steps.
"""
from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Optional, Sequence

DEFAULT_MAX_EXPANSIONS = 50_000


class PlanningFailure(RuntimeError):
    """No plan was found within the search limits."""

    def __init__(self, message: str, expansions: int = 0):
        super().__init__(message)
        self.expansions = expansions


class RegressionError(ValueError):
    pass


@dataclass(frozen=True)
class Step:
    """A ground rule instance.

    ``preconds`` pairs each precondition with the abstraction level from
    which it is considered; ``deletes`` is an explicit delete list used by
    plain STRIPS domains (belief domains decide deletion geometrically).
    """

    rule: str
    args: tuple
    kind: str
    preconds: tuple
    results: frozenset
    cost: float
    deletes: frozenset = frozenset()

    @property
    def primitive(self) -> bool:
        return self.kind == "physical"

    def sort_key(self) -> tuple:
        from ..belief.state import anchor_sort_key

        return (self.rule, tuple(anchor_sort_key(str(a)) for a in self.args))

    def describe(self) -> str:
        return f"{self.rule}({', '.join(str(a) for a in self.args)})"

    def precond_set(self, level: int) -> frozenset:
        return frozenset(f for f, lvl in self.preconds if lvl <= level)


@dataclass
class Plan:
    """Steps in execution order with the subgoal required before each.

    ``preimages[i]`` must hold before ``steps[i]``; ``preimages[-1]`` is
    the goal set the plan achieves.
    """

    steps: list
    preimages: list
    level: int
    cost: float
    goal: object = None
    bindings: dict = field(default_factory=dict)
    expansions: int = 0

    def __len__(self):
        return len(self.steps)

    def describe(self) -> list[str]:
        return [s.describe() for s in self.steps]


@dataclass
class SearchNode:
    subgoal: frozenset
    g: float
    depth: int
    parent: Optional["SearchNode"]
    step: Optional[Step]
    root: int
    key: tuple


def _cost_key(g: float) -> float:
    return round(g, 9)


def regression_search(
    roots: Sequence[tuple[frozenset, tuple]],
    satisfied: Callable[[frozenset], bool],
    successors: Callable[[frozenset], Iterable[tuple[Step, frozenset]]],
    max_expansions: int = DEFAULT_MAX_EXPANSIONS,
    max_length: Optional[int] = None,
    canonical: Callable[[frozenset], Hashable] = lambda s: s,
) -> tuple[SearchNode, int]:
    """Dijkstra from the goal sets back toward a set satisfied now.

    Ties on cost break by plan length, then lexicographically on the
    forward-order step keys (rule name, then anchor ids), then root order.
    Returns the satisfied node and the number of expansions.
    """
    counter = itertools.count()
    frontier: list = []
    for i, (subgoal, root_key) in enumerate(roots):
        node = SearchNode(subgoal, 0.0, 0, None, None, i, ())
        heapq.heappush(frontier, ((0.0, 0, (), root_key, next(counter)), node))
    closed: set = set()
    expansions = 0
    while frontier:
        (_, _, _, root_key, _), node = heapq.heappop(frontier)
        sig = canonical(node.subgoal) if max_length is None else (canonical(node.subgoal), node.depth)
        if sig in closed:
            continue
        closed.add(sig)
        if satisfied(node.subgoal):
            return node, expansions
        if max_length is not None and node.depth >= max_length:
            continue
        expansions += 1
        if expansions > max_expansions:
            raise PlanningFailure(f"expansion limit {max_expansions} reached", expansions)
        for step, pre in successors(node.subgoal):
            if not math.isfinite(step.cost) or step.cost < 0:
                continue
            g = node.g + step.cost
            child = SearchNode(pre, g, node.depth + 1, node, step, node.root, (step.sort_key(),) + node.key)
            csig = canonical(pre) if max_length is None else (canonical(pre), child.depth)
            if csig in closed:
                continue
            heapq.heappush(frontier, ((_cost_key(g), child.depth, child.key, root_key, next(counter)), child))
    raise PlanningFailure("search space exhausted", expansions)


def unwind(node: SearchNode) -> tuple[list[Step], list[frozenset]]:
    """Steps in forward order and the matching preimage list."""
    steps, preimages = [], [node.subgoal]
    while node.parent is not None:
        steps.append(node.step)
        node = node.parent
        preimages.append(node.subgoal)
    return steps, preimages


def strips_regress(subgoal: frozenset, step: Step, level: int = 1) -> frozenset:
    """Classical regression through a step with an explicit delete list."""
    if not (step.results & subgoal):
        raise RegressionError(f"{step.describe()} achieves nothing in the subgoal")
    if step.deletes & (subgoal - step.results):
        raise RegressionError(f"{step.describe()} deletes part of the subgoal")
    return (subgoal - step.results) | step.precond_set(level)
