from .domain import DEFAULT_RELIABILITY, PlanContext, RuleParams, place_slot
from .fluents import Clear, HandEmpty, Holding, Near, Observed, PoseKnown
from .planner import check_preimages, goal_roots, plan, refine, render_plan
from .rules import Rule, RuleLibrary, RuleSchema, default_rules, regress
from .search import Plan, PlanningFailure, RegressionError, Step, regression_search
from .strips import GroundAction, simulate, strips_plan

__all__ = [
    "DEFAULT_RELIABILITY", "PlanContext", "RuleParams", "place_slot",
    "Clear", "HandEmpty", "Holding", "Near", "Observed", "PoseKnown",
    "check_preimages", "goal_roots", "plan", "refine", "render_plan",
    "Rule", "RuleLibrary", "RuleSchema", "default_rules", "regress",
    "Plan", "PlanningFailure", "RegressionError", "Step", "regression_search",
    "GroundAction", "simulate", "strips_plan",
]
