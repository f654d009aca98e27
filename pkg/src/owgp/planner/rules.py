"""Operator and inference rule library for the belief-space planner.

Each rule knows how to propose ground instances that achieve a given
subgoal fluent (its candidate generator) and which fluents an instance
would falsify.  Preconditions carry an abstraction level: 0 for the
abstract plan, 1 for the concrete one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator

from ..belief.updates import exists_in_region_prob
from ..lang.ast import KRD, BBool, BContents, Const, Den, ExistsInRegion, Lambda, Rel, Skolem, Var
from ..lang.evaluate import UnsupportedExpression, den_prob, props_for
from .domain import PlanContext, term_name
from .fluents import Clear, HandEmpty, Holding, Near, Observed, PoseKnown
from .search import RegressionError, Step

SPATIAL = ("on", "in")
ABSTRACT, CONCRETE = 0, 1
TRUE_EXPR = Lambda("x", Rel("true", (Var("x"),)))


@dataclass(frozen=True)
class RuleSchema:
    """Declarative summary of a rule (used for documentation and listing)."""

    name: str
    params: tuple
    kind: str
    preconds: tuple
    results: tuple
    cost: str

    @property
    def primitive(self) -> bool:
        return self.kind == "physical"


def neg_log(p: float) -> float:
    if p <= 0.0:
        return math.inf
    return max(0.0, -math.log(p))


def _spatial(f) -> bool:
    return isinstance(f, BBool) and isinstance(f.phi, Rel) and f.phi.name in SPATIAL


def deletable(f) -> bool:
    """Fluents that some physical action can make false."""
    return isinstance(f, (Near, HandEmpty, Holding)) or _spatial(f)


class Rule:
    schema: RuleSchema

    @property
    def name(self) -> str:
        return self.schema.name

    def achievers(self, f, subgoal: frozenset, ctx: PlanContext) -> Iterator[Step]:
        return iter(())

    def clobbers(self, step: Step, f, ctx: PlanContext) -> bool:
        return False

    def cost(self, step: Step, ctx: PlanContext) -> float:
        return neg_log(ctx.params.reliability.get(self.name, 1.0))

    def _step(self, args, preconds, results, cost) -> Step:
        return Step(self.name, tuple(args), self.schema.kind, tuple(preconds), frozenset(results), cost)


# Inference rules --------------------------------------------------------------

class ExamineObj(Rule):
    schema = RuleSchema(
        "ExamineObj", ("expr", "Props", "Obj", "P_r"), "inference",
        (("B(Den(expr, Obj), P_p)", ABSTRACT), ("B(R(Obj), P_r^(1/|Props|)) for R in Props", CONCRETE)),
        ("B(Den(expr, Obj), P_r)", "KRD(Obj)"), "-log P_p")

    def achievers(self, f, subgoal, ctx):
        if not (isinstance(f, BBool) and isinstance(f.phi, Den)):
            return
        obj = f.phi.term
        if not (isinstance(obj, Const) and ctx.is_object(obj)):
            return
        expr = f.phi.expr
        p_p = den_prob(expr, obj, ctx.belief)
        if p_p < ctx.params.min_plausible:
            return
        try:
            props = sorted(props_for(expr, ctx.belief.vocab))
        except UnsupportedExpression:
            return
        q = min(1.0, f.p ** (1.0 / len(props)) + 1e-12)
        linked = [BBool(Rel(rel, (obj,)), q) for _, rel in props]
        # a property already measured and found wanting rules the candidate out;
        # type confidence follows the mean, so only a rival type's win counts there
        for (dim, rel), g in zip(props, linked):
            if not ctx.holds(Observed(obj, dim)):
                continue
            if dim == "type":
                if ctx.belief.objects[obj.name].type_d[rel] <= 1.0 - ctx.params.type_confident:
                    return
            elif not ctx.holds(g):
                return
        pre = [(BBool(Den(expr, obj), p_p * ctx.params.examine_ratio), ABSTRACT)]
        pre += [(g, CONCRETE) for g in linked]
        results = {g for g in subgoal
                   if isinstance(g, BBool) and g.phi == f.phi and g.p <= f.p}
        results |= {f, KRD(obj)}
        yield self._step((obj,), pre, results, neg_log(p_p))


class FindObj(Rule):
    schema = RuleSchema(
        "FindObj", ("expr", "Region", "Obj", "P_r"), "inference",
        (("BContents(Region, P_c)", ABSTRACT), ("B(ExistsIn(expr, Region), P_p)", ABSTRACT)),
        ("B(Den(expr, Obj), P_r)", "KRD(Obj)"), "-log P_p")

    def achievers(self, f, subgoal, ctx):
        if isinstance(f, BBool) and isinstance(f.phi, Den) and isinstance(f.phi.term, Skolem):
            sk, expr = f.phi.term, f.phi.expr
        elif isinstance(f, KRD) and isinstance(f.term, Skolem):
            sk = f.term
            if any(isinstance(g, BBool) and isinstance(g.phi, Den) and g.phi.term == sk for g in subgoal):
                return
            expr = None
        else:
            return
        params = ctx.params
        for name in sorted(ctx.belief.regions):
            p_p = exists_in_region_prob(ctx.belief, expr or TRUE_EXPR, name)
            if p_p < params.min_plausible:
                continue
            # searching again must promise better knowledge than we have now
            p_c = max(params.contents_threshold, ctx.predicted_contents(name) - 1e-9)
            if ctx.holds(BContents(name, p_c)):
                continue
            pre = [(BContents(name, p_c), ABSTRACT),
                   (ExistsInRegion(expr or TRUE_EXPR, name, p_p * params.find_ratio), ABSTRACT)]
            results = {KRD(sk)}
            if expr is not None:
                results |= {g for g in subgoal
                            if isinstance(g, BBool) and g.phi == f.phi and g.p <= f.p}
            yield self._step((Const(name), sk), pre, results, neg_log(p_p))


class Link(Rule):
    """Believing R(o) at P_r once the matching property has been observed."""

    def __init__(self, dim: str):
        self.dim = dim
        self.schema = RuleSchema(
            f"Link{dim.capitalize()}", ("R", "Obj", "P_r"), "inference",
            ((f"Observed(Obj, {dim})", ABSTRACT),), ("B(R(Obj), P_r)",), "0")

    def achievers(self, f, subgoal, ctx):
        if not (isinstance(f, BBool) and isinstance(f.phi, Rel) and len(f.phi.args) == 1):
            return
        if ctx.belief.vocab.dimension(f.phi.name) != self.dim:
            return
        obj = f.phi.args[0]
        if not (isinstance(obj, Const) and ctx.is_object(obj)):
            return
        obs = Observed(obj, self.dim)
        if ctx.holds(obs):
            return
        results = {g for g in subgoal if isinstance(g, BBool) and g.phi == f.phi}
        yield self._step((f.phi.name, obj), [(obs, ABSTRACT)], results | {f}, 0.0)

    def cost(self, step, ctx):
        return 0.0


# Physical operators -------------------------------------------------------------

class MoveBase(Rule):
    schema = RuleSchema("MoveBase", ("Target",), "physical", (),
                        ("Near(Target)",), "-log reliability")

    def achievers(self, f, subgoal, ctx):
        if not isinstance(f, Near):
            return
        target = term_name(f.target)
        if target is None or not (target in ctx.belief.regions or target in ctx.belief.objects):
            return
        if target == ctx.belief.held:
            return
        pose = ctx.approach(target)
        results = {g for g in subgoal if isinstance(g, Near)
                   and term_name(g.target) is not None and ctx.near_from(pose, term_name(g.target))}
        if f not in results:
            return
        yield self._step((Const(target),), (), results, self.cost(None, ctx))

    def clobbers(self, step, f, ctx):
        if not isinstance(f, Near):
            return False
        target = term_name(f.target)
        return target is None or not ctx.near_from(ctx.approach(step.args[0].name), target)


class Look(Rule):
    schema = RuleSchema(
        "Look", ("Obj",), "physical",
        (("KRD(Obj)", ABSTRACT), ("Near(Obj)", CONCRETE), ("Clear(Obj)", CONCRETE)),
        ("Observed(Obj, type)", "Observed(Obj, color)", "PoseKnown(Obj)"), "-log reliability")

    def achievers(self, f, subgoal, ctx):
        if isinstance(f, Observed) and f.dim in ("type", "color"):
            obj = f.obj
        elif isinstance(f, PoseKnown):
            obj = f.obj
        else:
            return
        if not (isinstance(obj, Const) and ctx.is_object(obj)) or obj.name == ctx.belief.held:
            return
        pre = [(KRD(obj), ABSTRACT), (Near(obj), CONCRETE), (Clear(obj), CONCRETE)]
        results = {Observed(obj, "type"), Observed(obj, "color"), PoseKnown(obj)}
        yield self._step((obj,), pre, results, self.cost(None, ctx))


class LookAtRegion(Rule):
    schema = RuleSchema(
        "LookAtRegion", ("Region",), "physical", (("Near(Region)", CONCRETE),),
        ("BContents(Region, P_c)",), "-log reliability")

    def achievers(self, f, subgoal, ctx):
        if not (isinstance(f, BContents) and f.region in ctx.belief.regions):
            return
        predicted = ctx.predicted_contents(f.region)
        if predicted < f.p:
            return
        results = {g for g in subgoal
                   if isinstance(g, BContents) and g.region == f.region and g.p <= predicted}
        region = Const(f.region)
        yield self._step((region,), [(Near(region), CONCRETE)], results, self.cost(None, ctx))


class Pick(Rule):
    schema = RuleSchema(
        "Pick", ("Obj",), "physical",
        (("KRD(Obj)", ABSTRACT), ("HandEmpty()", CONCRETE), ("PoseKnown(Obj)", CONCRETE),
         ("Near(Obj)", CONCRETE), ("Clear(Obj)", CONCRETE)),
        ("Holding(Obj)", "Observed(Obj, weight)", "Clear(X) for X blocked only by Obj"),
        "-log reliability")

    def achievers(self, f, subgoal, ctx):
        if isinstance(f, Holding):
            cands = [f.obj]
        elif isinstance(f, Observed) and f.dim == "weight":
            cands = [f.obj]
        elif isinstance(f, Clear):
            name = term_name(f.obj)
            blockers = ctx.blockers(name) if name is not None and ctx.is_object(f.obj) else ()
            cands = [Const(blockers[0])] if len(blockers) == 1 else []
        else:
            return
        for obj in cands:
            if not (isinstance(obj, Const) and ctx.is_object(obj)):
                continue
            pre = [(KRD(obj), ABSTRACT), (HandEmpty(), CONCRETE), (PoseKnown(obj), CONCRETE),
                   (Near(obj), CONCRETE), (Clear(obj), CONCRETE)]
            results = {Holding(obj), Observed(obj, "weight")}
            for g in subgoal:
                if isinstance(g, Clear) and ctx.is_object(g.obj) and ctx.blockers(g.obj.name) == (obj.name,):
                    results.add(g)
            yield self._step((obj,), pre, results, self.cost(None, ctx))

    def clobbers(self, step, f, ctx):
        obj = step.args[0]
        if isinstance(f, HandEmpty):
            return True
        if isinstance(f, Holding):
            return f.obj != obj
        if isinstance(f, Near):
            return f.target == obj
        return _spatial(f) and f.phi.args[0] == obj


class Place(Rule):
    schema = RuleSchema(
        "Place", ("Obj", "Region"), "physical",
        (("KRD(Obj)", ABSTRACT), ("Holding(Obj)", CONCRETE), ("Near(Region)", CONCRETE)),
        ("B(On(Obj, Region), P)", "B(In(Obj, Region), P)", "HandEmpty()"), "-log reliability")

    def achievers(self, f, subgoal, ctx):
        params = ctx.params
        if _spatial(f):
            obj, region = f.phi.args
            if f.p > params.place_confidence:
                return
            if not isinstance(obj, (Const, Skolem)) or isinstance(obj, Const) and not ctx.is_object(obj):
                return
            if not ctx.is_region(region):
                return
            pairs = [(obj, region.name)]
        elif isinstance(f, HandEmpty):
            objs = set()
            if ctx.belief.held is not None:
                objs.add(ctx.belief.held)
            for g in subgoal:
                if isinstance(g, Clear) and ctx.is_object(g.obj):
                    bl = ctx.blockers(g.obj.name)
                    if len(bl) == 1:
                        objs.add(bl[0])
            pairs = [(Const(o), r) for o in sorted(objs) for r in sorted(ctx.belief.regions)]
        else:
            return
        for obj, region in pairs:
            if not ctx.has_slot(region):
                continue
            reg = Const(region)
            pre = [(KRD(obj), ABSTRACT), (Holding(obj), CONCRETE), (Near(reg), CONCRETE)]
            results = {HandEmpty()}
            for g in subgoal:
                if (_spatial(g) and g.phi.args[0] == obj and g.phi.args[1] == reg
                        and g.p <= params.place_confidence):
                    results.add(g)
            yield self._step((obj, reg), pre, results, self.cost(None, ctx))

    def clobbers(self, step, f, ctx):
        return isinstance(f, Holding) and f.obj == step.args[0]


class Weigh(Rule):
    schema = RuleSchema(
        "Weigh", ("Obj",), "physical",
        (("KRD(Obj)", ABSTRACT), ("Holding(Obj)", CONCRETE)),
        ("Observed(Obj, weight)",), "-log reliability")

    def achievers(self, f, subgoal, ctx):
        if not (isinstance(f, Observed) and f.dim == "weight"):
            return
        if not (isinstance(f.obj, Const) and ctx.is_object(f.obj)):
            return
        pre = [(KRD(f.obj), ABSTRACT), (Holding(f.obj), CONCRETE)]
        yield self._step((f.obj,), pre, {f}, self.cost(None, ctx))


def default_rules() -> list[Rule]:
    return [ExamineObj(), FindObj(), Link("type"), Link("color"), Link("weight"),
            MoveBase(), Look(), LookAtRegion(), Pick(), Place(), Weigh()]


class RuleLibrary:
    def __init__(self, rules: Iterable[Rule] = None):
        self.rules = list(rules) if rules is not None else default_rules()
        self.by_name = {r.name: r for r in self.rules}

    def rule(self, name: str) -> Rule:
        return self.by_name[name]

    def schemas(self) -> list[RuleSchema]:
        return [r.schema for r in self.rules]


def consistent(subgoal: frozenset, ctx: PlanContext) -> bool:
    """Reject subgoal sets that no belief can satisfy."""
    held = {f.obj for f in subgoal if isinstance(f, Holding)}
    if len(held) > 1 or (held and HandEmpty() in subgoal):
        return False
    for f in subgoal:
        if _spatial(f) and f.phi.args[0] in held:
            return False
    near = [term_name(f.target) for f in subgoal if isinstance(f, Near)]
    if len(near) > 1:
        if any(t is None for t in near):
            return False
        poses = [ctx.base] + [ctx.approach(t) for t in near
                              if t in ctx.belief.regions or t in ctx.belief.objects]
        if not any(all(ctx.near_from(p, t) for t in near) for p in poses):
            return False
    return True


def regress(subgoal: frozenset, step: Step, ctx: PlanContext, level: int,
            library: RuleLibrary = None) -> frozenset:
    """Subgoal that must hold before ``step`` so that ``subgoal`` holds after."""
    library = library or _DEFAULT_LIBRARY
    if not (step.results & subgoal):
        raise RegressionError(f"{step.describe()} achieves nothing in the subgoal")
    rest = subgoal - step.results
    rule = library.rule(step.rule)
    for f in rest:
        if rule.clobbers(step, f, ctx):
            raise RegressionError(f"{step.describe()} undoes {f!r}")
    pre = rest | step.precond_set(level)
    if not consistent(pre, ctx):
        raise RegressionError(f"{step.describe()} leaves a contradictory subgoal")
    return pre


def action_cost(step: Step, belief, params=None) -> float:
    """-log of the success probability of a ground step in ``belief``."""
    from .domain import RuleParams

    ctx = PlanContext(belief, params or RuleParams())
    if step.rule == "ExamineObj":
        den = next(f for f, _ in step.preconds if isinstance(f, BBool) and isinstance(f.phi, Den))
        return neg_log(den_prob(den.phi.expr, step.args[0], belief))
    if step.rule == "FindObj":
        ex = next(f for f, _ in step.preconds if isinstance(f, ExistsInRegion))
        return neg_log(exists_in_region_prob(belief, ex.expr, ex.region))
    return _DEFAULT_LIBRARY.rule(step.rule).cost(step, ctx)


_DEFAULT_LIBRARY = RuleLibrary()


__all__ = ["Rule", "RuleSchema", "RuleLibrary", "regress", "action_cost", "consistent",
           "deletable", "default_rules", "neg_log"]
