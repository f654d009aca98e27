"""Plan construction: goal roots, the regression search and refinement."""
from __future__ import annotations

import itertools
from typing import Optional

from ..belief.state import BeliefState, anchor_sort_key
from ..lang.ast import Const, GoalFormula, Skolem, Var, bind_terms
from .domain import PlanContext, RuleParams
from .fluents import fluent_key, sorted_fluents
from .rules import RuleLibrary, consistent, deletable, regress
from .search import Plan, PlanningFailure, RegressionError, regression_search, unwind


def goal_roots(belief: BeliefState, goal, next_skolem: int = 1) -> list[tuple[frozenset, tuple, dict]]:
    """Ground the goal's existential variables.

    Every variable ranges over the known object anchors plus one fresh
    Skolem constant; each combination becomes a separate search root.
    """
    if isinstance(goal, frozenset):
        return [(goal, (), {})]
    if not isinstance(goal, GoalFormula):
        raise TypeError("goal must be a GoalFormula or a fluent set")
    if not goal.variables:
        return [(frozenset(goal.fluents), (), {})]
    choices = []
    for i, v in enumerate(goal.variables):
        choices.append([Const(a) for a in belief.anchors()] + [Skolem(next_skolem + i)])
    roots = []
    for combo in itertools.product(*choices):
        mapping = {Var(v): t for v, t in zip(goal.variables, combo)}
        # quantified variables are parsed as Var, constants as Const
        fluents = frozenset(bind_terms(f, mapping) for f in goal.fluents)
        key = tuple((1, 0, "") if isinstance(t, Skolem) else (0,) + anchor_sort_key(t.name)[1:]
                    for t in combo)
        roots.append((fluents, key, {v: t for v, t in zip(goal.variables, combo)}))
    return roots


def plan(belief: BeliefState, goal, level: int = 0, params: Optional[RuleParams] = None,
         library: Optional[RuleLibrary] = None, next_skolem: int = 1,
         max_expansions: Optional[int] = None) -> Plan:
    """Minimum-cost plan (sum of -log p) from ``belief`` to ``goal``.

    Raises :class:`PlanningFailure` when no plan exists within the limits.
    """
    params = params or RuleParams()
    library = library or RuleLibrary()
    ctx = PlanContext(belief, params)
    roots = goal_roots(belief, goal, next_skolem)
    roots = [r for r in roots if consistent(r[0], ctx)]
    if not roots:
        raise PlanningFailure("goal is self-contradictory")

    def satisfied(subgoal):
        return all(ctx.holds(f) for f in subgoal)

    def successors(subgoal):
        seen = set()
        for f in sorted_fluents(subgoal):
            if ctx.holds(f) and not deletable(f):
                continue
            for rule in library.rules:
                for step in rule.achievers(f, subgoal, ctx):
                    if step in seen:
                        continue
                    seen.add(step)
                    try:
                        pre = regress(subgoal, step, ctx, level, library)
                    except RegressionError:
                        continue
                    yield step, pre

    node, expansions = regression_search(
        [(r[0], r[1]) for r in roots], satisfied, successors,
        max_expansions=max_expansions or params.max_expansions)
    steps, preimages = unwind(node)
    return Plan(steps=steps, preimages=preimages, level=level, cost=node.g,
                goal=goal, bindings=dict(roots[node.root][2]), expansions=expansions)


def refine(plan_: Plan, index: int, belief: BeliefState, params: Optional[RuleParams] = None,
           library: Optional[RuleLibrary] = None, next_skolem: int = 1) -> Plan:
    """Plan one level down for the subgoal that step ``index`` leads to.

    The subgoal is the preimage of the following step, so conditions that
    later steps rely on are kept while the step is worked out in detail.
    A step already at the most concrete level comes back as a one-step plan.
    """
    step = plan_.steps[index]
    if plan_.level >= 1:
        return Plan([step], [plan_.preimages[index], plan_.preimages[index + 1]], plan_.level,
                    step.cost, goal=plan_.preimages[index + 1])
    sub = plan_.preimages[index + 1]
    return plan(belief, sub, plan_.level + 1, params, library, next_skolem)


def check_preimages(plan_: Plan, belief: BeliefState, params: Optional[RuleParams] = None,
                    library: Optional[RuleLibrary] = None) -> bool:
    """Re-derive every stored preimage by regressing from the plan's end."""
    ctx = PlanContext(belief, params or RuleParams())
    library = library or RuleLibrary()
    sub = plan_.preimages[-1]
    for i in range(len(plan_.steps) - 1, -1, -1):
        sub = regress(sub, plan_.steps[i], ctx, plan_.level, library)
        if sub != plan_.preimages[i]:
            return False
    return True


def render_plan(plan_: Plan) -> list[str]:
    lines = []
    for step, pre in zip(plan_.steps, plan_.preimages):
        lines.append(f"  pre: {', '.join(fluent_key(f)[1] for f in sorted_fluents(pre))}")
        lines.append(f"{step.describe()}")
    lines.append(f"  goal: {', '.join(fluent_key(f)[1] for f in sorted_fluents(plan_.preimages[-1]))}")
    return lines
