"""Plan / execute / observe / replan loop over a hierarchical plan stack."""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field, replace
from typing import Optional

from .belief.distributions import PoseDistribution
from .belief.relations import top_color
from .belief.state import BeliefState, ObservationNoiseModel
from .belief.updates import (
    DEFAULT_GATE,
    associate_detection,
    inflate_pose,
    raise_existence,
    set_pose,
    update_region_confidence,
    update_weight,
)
from .lang.ast import BBool, Const, Den, GoalFormula, Skolem, Var, bind_terms, terms_of
from .lang.evaluate import den_prob
from .lang.parser import fluent_text
from .planner.domain import PlanContext, RuleParams, place_slot, term_name
from .planner.fluents import sorted_fluents
from .planner.planner import plan as make_plan
from .planner.planner import refine
from .planner.rules import RuleLibrary
from .planner.search import Plan, PlanningFailure, Step
from .sim import REST_HEIGHT, Action, ActionFailed, Detections, Null, Simulator, Weight

log = logging.getLogger(__name__)

MAX_LEVEL = 1
STALL_LIMIT = 3
IDLE_LIMIT = 200
SUCCESS, PLANNING_FAILURE, BUDGET_EXHAUSTED = "success", "planning-failure", "budget-exhausted"


@dataclass
class Limits:
    max_primitives: int = 200
    max_replans: int = 25


@dataclass
class Frame:
    plan: Plan
    parent_step: Optional[int] = None
    current: int = 0
    serial: int = 0


@dataclass
class PlanStack:
    frames: list = field(default_factory=list)

    def __len__(self):
        return len(self.frames)

    @property
    def top(self) -> Frame:
        return self.frames[-1]

    def skolems(self) -> set:
        out = set()
        for fr in self.frames:
            for s in fr.plan.steps:
                out |= {t for t in terms_of(s.args) if isinstance(t, Skolem)}
        return out


@dataclass
class ExecutionTrace:
    """Append-only list of JSON-ready records."""

    seed: Optional[int] = None
    records: list = field(default_factory=list)

    def add(self, kind: str, payload: dict, belief: BeliefState, depth: int):
        self.records.append({
            "step": len(self.records),
            "kind": kind,
            "payload": payload,
            "belief": belief_summary(belief),
            "stack_depth": depth,
            "seed": self.seed,
        })

    def kinds(self) -> list[str]:
        return [r["kind"] for r in self.records]

    def __len__(self):
        return len(self.records)


@dataclass
class Outcome:
    status: str
    steps_used: int
    replans: int
    belief: BeliefState
    trace: ExecutionTrace
    binding: dict = field(default_factory=dict)
    diagnostic: str = ""

    @property
    def success(self) -> bool:
        return self.status == SUCCESS


def _r(x: float) -> float:
    return round(float(x), 6)


def belief_summary(belief: BeliefState) -> dict:
    out = {}
    for a in belief.anchors():
        ob = belief.objects[a]
        out[a] = {
            "type": ob.type_d.map(),
            "pose": [_r(v) for v in ob.pose_d.mean],
            "color": top_color(belief, a),
            "grams": _r(ob.weight_d.median_grams),
            "exists": _r(ob.detection_weight),
        }
    return {"objects": out, "held": belief.held,
            "base": [_r(v) for v in belief.robot_pose.mean]}


# Goal and preimage checks -----------------------------------------------------

def goal_binding(goal, belief: BeliefState, params: Optional[RuleParams] = None) -> Optional[dict]:
    """A binding of the goal's variables under which every fluent holds."""
    ctx = PlanContext(belief, params or RuleParams())
    if isinstance(goal, frozenset):
        return {} if all(ctx.holds(f) for f in goal) else None
    if not goal.variables:
        return {} if all(ctx.holds(f) for f in goal.fluents) else None
    anchors = belief.anchors()
    for combo in itertools.product(anchors, repeat=len(goal.variables)):
        mapping = {Var(v): Const(a) for v, a in zip(goal.variables, combo)}
        if all(ctx.holds(bind_terms(f, mapping)) for f in goal.fluents):
            return dict(zip(goal.variables, combo))
    return None


def current_step(plan_: Plan, ctx: PlanContext) -> int:
    """Largest i whose preimage holds; -1 if none does."""
    for i in range(len(plan_.preimages) - 1, -1, -1):
        if all(ctx.holds(f) for f in plan_.preimages[i]):
            return i
    return -1


def preimage_valid(stack: PlanStack, belief: BeliefState, params: Optional[RuleParams] = None) -> int:
    """Deepest frame index k such that frames 0..k are all still valid.

    Updates each valid frame's ``current`` step as a side effect.
    """
    ctx = PlanContext(belief, params or RuleParams())
    k = -1
    for j, fr in enumerate(stack.frames):
        i = current_step(fr.plan, ctx)
        if i < 0:
            break
        if j > 0 and stack.frames[j - 1].current != fr.parent_step:
            break
        fr.current = i
        k = j
    return k


# Acting ----------------------------------------------------------------------------

def to_action(step: Step, belief: BeliefState, params: RuleParams) -> Action:
    """Turn a ground physical step into a world-coordinate command."""
    for a in step.args:
        if isinstance(a, (Skolem, Var)):
            raise ValueError(f"non-ground action {step.describe()}")
    ctx = PlanContext(belief, params)
    base = ctx.base
    name = step.rule
    if name == "MoveBase":
        return Action("MoveBase", pose=ctx.approach(step.args[0].name))
    if name == "LookAtRegion":
        return Action("LookAtRegion", region=step.args[0].name)
    if name in ("Look", "Pick", "Weigh"):
        obj = step.args[0].name
        return Action(name, point=ctx.xy(obj))
    if name == "Place":
        obj, region = step.args[0].name, step.args[1].name
        slot = place_slot(belief, region, base, params, exclude=obj)
        if slot is None:
            slot = tuple(float(v) for v in belief.regions[region].center[:2])
        return Action("Place", point=slot, region=region)
    raise ValueError(f"{name} is not a physical operator")


def execute_primitive(action: Action, sim: Simulator):
    return sim.step(action)


def apply_observation(belief: BeliefState, step: Step, action: Action, obs, noise: ObservationNoiseModel,
                      gate: float = DEFAULT_GATE, miss_rate: float = 0.0) -> tuple[BeliefState, dict]:
    """Fold an observation into the belief; returns the trace payload too."""
    payload: dict = {}
    name = step.rule
    if isinstance(obs, ActionFailed):
        payload = {"type": "failed", "reason": obs.reason}
        if name == "Pick":
            belief = inflate_pose(belief, step.args[0].name, 4.0)
        return belief, payload
    if name == "MoveBase":
        x, y, th = action.pose
        old = belief.robot_pose
        belief = replace(belief, robot_pose=PoseDistribution((x, y, old.mean[2], th), old.cov))
        return belief, {"type": "null"}
    if isinstance(obs, Detections):
        found = []
        for det in obs.items:
            belief, anchor, is_new = associate_detection(belief, det, noise, gate)
            found.append({"anchor": anchor, "new": is_new, **det.as_dict()})
        if obs.region is not None:
            belief = update_region_confidence(belief, obs.region, obs.coverage * (1.0 - miss_rate))
        payload = {"type": "detections", "detections": found}
        if obs.region is not None:
            payload.update(region=obs.region, coverage=obs.coverage)
        return belief, payload
    if isinstance(obs, Weight):
        obj = step.args[0].name
        if name == "Pick":
            belief = replace(belief, held=obj)
            belief = raise_existence(belief, obj)
            ob = belief.objects[obj]
            belief = belief.with_object(replace(ob, detection_weight=1.0))
        belief = update_weight(belief, obj, obs.grams, noise)
        return belief, {"type": "weight", "grams": obs.grams, "anchor": obj}
    if isinstance(obs, Null) and name == "Place":
        obj, region = step.args[0].name, step.args[1].name
        reg = belief.regions[region]
        theta = belief.objects[obj].pose_d.mean[3]
        x, y = action.point
        belief = set_pose(belief, obj, (x, y, reg.surface_z + REST_HEIGHT, theta), (0.01, 0.01, 0.01, 0.05))
        belief = replace(belief, held=None)
        return belief, {"type": "null", "placed": obj, "region": region, "point": [_r(x), _r(y)]}
    return belief, {"type": "null"}


def _skolem_expr(stack: PlanStack, sk: Skolem):
    for fr in stack.frames:
        for s in fr.plan.steps:
            if s.rule == "FindObj" and sk in s.args:
                for f in s.results:
                    if isinstance(f, BBool) and isinstance(f.phi, Den) and f.phi.term == sk:
                        return f.phi.expr
    return None


def bind_skolems(stack: PlanStack, belief: BeliefState, new_anchors: list[str],
                 params: RuleParams) -> list[tuple[Skolem, str]]:
    """Give each pending Skolem the best newly found anchor, if plausible."""
    bound = []
    taken = set()
    for sk in sorted(stack.skolems(), key=lambda s: s.id):
        expr = _skolem_expr(stack, sk)
        if expr is None:
            continue
        best, best_p = None, params.min_plausible
        for a in new_anchors:
            if a in taken:
                continue
            p = den_prob(expr, a, belief)
            if p >= best_p and (best is None or p > best_p):
                best, best_p = a, p
        if best is None:
            continue
        taken.add(best)
        mapping = {sk: Const(best)}
        for fr in stack.frames:
            p = fr.plan
            fr.plan = replace(p, steps=[bind_terms(s, mapping) for s in p.steps],
                              preimages=[bind_terms(pre, mapping) for pre in p.preimages],
                              goal=bind_terms(p.goal, mapping) if isinstance(p.goal, frozenset) else p.goal)
        bound.append((sk, best))
    return bound


def _plan_payload(p: Plan) -> dict:
    return {
        "level": p.level,
        "steps": p.describe(),
        "cost": _r(p.cost),
        "goal": [fluent_text(f) for f in sorted_fluents(p.preimages[-1])],
    }


def run(belief: BeliefState, goal, sim: Simulator, limits: Optional[Limits] = None,
        seed: Optional[int] = None, params: Optional[RuleParams] = None,
        library: Optional[RuleLibrary] = None, noise: Optional[ObservationNoiseModel] = None,
        gate: float = DEFAULT_GATE) -> Outcome:
    """Achieve ``goal`` in the simulated world, replanning on surprises."""
    limits = limits or Limits()
    params = params or RuleParams()
    library = library or RuleLibrary()
    noise = noise or sim.world.noise
    trace = ExecutionTrace(seed=seed)
    stack = PlanStack()
    primitives = replans = 0
    next_skolem = 1
    planned_once = False
    last_exec: Optional[tuple] = None
    repeats = 0
    serials = itertools.count()
    idle = 0

    def finish(status, diagnostic=""):
        trace.add("done", {"status": status, "primitives": primitives, "replans": replans,
                           "diagnostic": diagnostic}, belief, len(stack))
        return Outcome(status, primitives, replans, belief, trace,
                       goal_binding(goal, belief, params) or {}, diagnostic)

    def pop(reason):
        fr = stack.frames.pop()
        trace.add("pop", {"level": fr.plan.level, "reason": reason}, belief, len(stack))

    while True:
        if goal_binding(goal, belief, params) is not None:
            while stack.frames:
                pop("achieved")
            return finish(SUCCESS)

        k = preimage_valid(stack, belief, params)
        while len(stack) > k + 1:
            fr = stack.top
            ctx = PlanContext(belief, params)
            done = all(ctx.holds(f) for f in fr.plan.preimages[-1])
            pop("achieved" if done else "invalid")

        if not stack.frames:
            if planned_once:
                replans += 1
                trace.add("replan", {"count": replans}, belief, 0)
                if replans > limits.max_replans:
                    return finish(BUDGET_EXHAUSTED, "replan budget exhausted")
            try:
                root = make_plan(belief, goal, 0, params, library, next_skolem)
            except PlanningFailure as exc:
                return finish(PLANNING_FAILURE, str(exc))
            planned_once = True
            next_skolem += max(1, len(getattr(goal, "variables", ())))
            stack.frames.append(Frame(root, serial=next(serials)))
            trace.add("push", _plan_payload(root), belief, len(stack))
            continue

        idle += 1
        if idle > IDLE_LIMIT:
            return finish(BUDGET_EXHAUSTED, "no primitive executed for too long")
        top = stack.top
        i = top.current
        if i >= len(top.plan.steps):
            pop("achieved")
            continue
        step = top.plan.steps[i]

        if top.plan.level < MAX_LEVEL:
            try:
                sub = refine(top.plan, i, belief, params, library, next_skolem)
            except PlanningFailure:
                pop("refine-failed")
                continue
            stack.frames.append(Frame(sub, parent_step=i, serial=next(serials)))
            trace.add("push", _plan_payload(sub), belief, len(stack))
            continue

        if step.kind != "physical":
            # the step's preimage holds but its conclusion does not: the
            # optimistic assumption behind this inference has failed
            pop("inference-failed")
            continue

        key = (top.serial, i)
        repeats = repeats + 1 if key == last_exec else 1
        last_exec = key
        if repeats > STALL_LIMIT:
            last_exec = None
            pop("stalled")
            continue

        if primitives >= limits.max_primitives:
            return finish(BUDGET_EXHAUSTED, "primitive budget exhausted")
        try:
            action = to_action(step, belief, params)
            obs = execute_primitive(action, sim)
        except Exception as exc:  # simulator fault
            log.exception("simulator fault")
            return finish(BUDGET_EXHAUSTED, f"simulator fault: {exc}")
        primitives += 1
        idle = 0
        trace.add("action", {"rule": step.rule, "args": [str(a) for a in step.args],
                             "level": top.plan.level}, belief, len(stack))
        before = set(belief.objects)
        belief, payload = apply_observation(belief, step, action, obs, noise, gate,
                                            params.search_miss_rate)
        trace.add("observation", payload, belief, len(stack))
        log.debug("%s -> %s", step.describe(), payload.get("type"))
        new = [a for a in belief.anchors() if a not in before]
        if new:
            for sk, anchor in bind_skolems(stack, belief, new, params):
                trace.add("bind", {"skolem": str(sk), "anchor": anchor}, belief, len(stack))
