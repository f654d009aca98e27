"""Probabilistic evaluation of denoting expressions against a belief."""
from __future__ import annotations

from functools import reduce

from ..belief.distributions import BeliefError
from ..belief.fluents import holds_cont_fluent
from ..belief.relations import prob_ground_relation
from ..belief.state import DEFAULT_COLORS, HEAVY, SPATIAL_RELATIONS, TRUE_RELATION, BeliefState
from ..belief.updates import exists_in_region_prob
from .ast import (
    KRD,
    And,
    BBool,
    BCont,
    BContents,
    Const,
    Den,
    Exists,
    ExistsInRegion,
    Lambda,
    Or,
    Rel,
    Skolem,
    Var,
    substitute,
)


class EvaluationError(ValueError):
    pass


class UnsupportedExpression(ValueError):
    pass


def p_or(p1: float, p2: float) -> float:
    return p1 + p2 - p1 * p2


def eval_expr(expr, belief: BeliefState) -> float:
    """Probability that a closed, lambda-free expression holds.

    Conjunctions multiply, disjunctions use inclusion-exclusion and an
    existential becomes the disjunction over every object anchor in the
    belief.  Each relation instance is treated as independent, even when
    the same object occurs twice.
    """
    if isinstance(expr, Rel):
        names = []
        for a in expr.args:
            if isinstance(a, Var):
                raise EvaluationError(f"free variable {a.name!r} in {expr.name}")
            if isinstance(a, Skolem):
                return 0.0
            names.append(a.name)
        try:
            return prob_ground_relation(belief, expr.name, names)
        except BeliefError as exc:
            raise EvaluationError(str(exc)) from exc
    if isinstance(expr, And):
        return eval_expr(expr.left, belief) * eval_expr(expr.right, belief)
    if isinstance(expr, Or):
        return p_or(eval_expr(expr.left, belief), eval_expr(expr.right, belief))
    if isinstance(expr, Exists):
        probs = [eval_expr(substitute(expr.body, {expr.var: Const(o)}), belief)
                 for o in belief.anchors()]
        return reduce(p_or, probs, 0.0)
    if isinstance(expr, Lambda):
        raise EvaluationError("lambda expressions are evaluated through den_prob")
    raise EvaluationError(f"not an expression: {expr!r}")


def den_prob(expr: Lambda, obj, belief: BeliefState) -> float:
    """P(Den(expr, obj)): ``eval`` of the body with the variable bound to ``obj``."""
    if not isinstance(expr, Lambda):
        raise EvaluationError("Den needs a lambda expression")
    if isinstance(obj, Skolem):
        return 0.0
    if isinstance(obj, Var):
        raise EvaluationError(f"free variable {obj.name!r} as Den argument")
    name = obj.name if isinstance(obj, Const) else obj
    if name not in belief.objects:
        raise EvaluationError(f"unknown anchor {name!r}")
    return eval_expr(substitute(expr.body, {expr.var: Const(name)}), belief)


def krd(term) -> bool:
    """Whether ``term`` is a rigid designator (an anchor or named constant)."""
    return isinstance(term, (Const, str))


def props_for(expr: Lambda, vocab=None) -> frozenset:
    """Observable (dimension, relation) pairs a conjunctive description tests.

    Only conjunctions of unary relations on the lambda variable are
    supported; anything else raises :class:`UnsupportedExpression`.
    Without a vocabulary the default color names are used.
    """
    if not isinstance(expr, Lambda):
        raise UnsupportedExpression("props_for needs a lambda expression")
    names = []

    def walk(e):
        if isinstance(e, And):
            walk(e.left)
            walk(e.right)
        elif isinstance(e, Rel) and len(e.args) == 1 and e.args[0] == Var(expr.var):
            names.append(e.name)
        else:
            raise UnsupportedExpression(f"cannot split {type(e).__name__} into properties")

    walk(expr.body)
    out: dict[str, str] = {}
    for name in names:
        dim = _dimension(name, vocab)
        if dim is None:
            raise UnsupportedExpression(f"relation {name!r} has no observable dimension")
        if out.get(dim, name) != name:
            raise UnsupportedExpression(f"two relations on the {dim} dimension: {out[dim]}, {name}")
        out[dim] = name
    return frozenset(out.items())


def _dimension(name: str, vocab):
    if vocab is not None:
        return vocab.dimension(name)
    if name == HEAVY:
        return "weight"
    if name in DEFAULT_COLORS:
        return "color"
    if name in (TRUE_RELATION, *SPATIAL_RELATIONS):
        return None
    return "type"


def fluent_prob(phi, belief: BeliefState) -> float:
    """P_b of the Boolean quantity inside a B(., p) fluent."""
    if isinstance(phi, Rel):
        return eval_expr(phi, belief)
    if isinstance(phi, Den):
        return den_prob(phi.expr, phi.term, belief)
    if isinstance(phi, ExistsInRegion):
        return exists_in_region_prob(belief, phi.expr, phi.region)
    if isinstance(phi, BContents):
        return belief.confidence(phi.region)
    raise EvaluationError(f"cannot evaluate {phi!r}")


def holds(fluent, belief: BeliefState) -> bool:
    """Truth value of a goal-language fluent in ``belief``."""
    if isinstance(fluent, BBool):
        return fluent_prob(fluent.phi, belief) >= fluent.p
    if isinstance(fluent, KRD):
        return krd(fluent.term)
    if isinstance(fluent, BContents):
        return belief.confidence(fluent.region) >= fluent.p
    if isinstance(fluent, ExistsInRegion):
        return exists_in_region_prob(belief, fluent.expr, fluent.region) >= fluent.p
    if isinstance(fluent, BCont):
        if not isinstance(fluent.term, Const):
            return False
        return holds_cont_fluent(belief, (fluent.term.name, fluent.dim), fluent.mu,
                                 fluent.sigma, fluent.delta, fluent.p)
    raise EvaluationError(f"cannot evaluate fluent {fluent!r}")
