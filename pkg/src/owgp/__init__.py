"""Belief-space planning and execution for objects described by their properties."""
from .executive import ExecutionTrace, Limits, Outcome, run
from .lang.parser import parse_goal
from .scenario import Scenario, ScenarioError, load_scenario
from .sim import Simulator, WorldState
from .trace import emit_trace

__version__ = "0.1.0"

__all__ = [
    "ExecutionTrace", "Limits", "Outcome", "run", "parse_goal", "Scenario",
    "ScenarioError", "load_scenario", "Simulator", "WorldState", "emit_trace",
]
