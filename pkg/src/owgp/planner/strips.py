"""Plain propositional STRIPS planning on the shared regression engine.

Useful for checking the search itself on small ground domains where the
delete lists are explicit.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .search import Plan, RegressionError, Step, regression_search, strips_regress, unwind


@dataclass(frozen=True)
class GroundAction:
    name: str
    args: tuple
    pre: frozenset
    add: frozenset
    delete: frozenset
    cost: float

    def as_step(self) -> Step:
        return Step(self.name, self.args, "physical", tuple((p, 0) for p in sorted(self.pre)),
                    frozenset(self.add), float(self.cost), frozenset(self.delete))


def strips_plan(init: Iterable, goal: Iterable, actions: Iterable[GroundAction],
                max_expansions: int = 50_000, max_length: Optional[int] = None) -> Plan:
    """Cheapest plan from ``init`` (a set of true atoms) to ``goal``.

    Raises :class:`PlanningFailure` if the goal is unreachable.
    """
    init = frozenset(init)
    goal = frozenset(goal)
    steps = sorted((a.as_step() for a in actions), key=lambda s: s.sort_key())

    def satisfied(subgoal):
        return subgoal <= init

    def successors(subgoal):
        for step in steps:
            if not (step.results & subgoal):
                continue
            try:
                yield step, strips_regress(subgoal, step)
            except RegressionError:
                continue

    node, expansions = regression_search([(goal, ())], satisfied, successors,
                                         max_expansions=max_expansions, max_length=max_length)
    plan_steps, preimages = unwind(node)
    return Plan(plan_steps, preimages, level=0, cost=node.g, goal=goal, expansions=expansions)


def simulate(init: Iterable, steps: Iterable[Step]) -> frozenset:
    """Forward execution; raises ValueError when a precondition fails."""
    state = set(init)
    for step in steps:
        pre = step.precond_set(0)
        if not pre <= state:
            raise ValueError(f"{step.describe()} not applicable")
        state -= step.deletes
        state |= step.results
    return frozenset(state)
