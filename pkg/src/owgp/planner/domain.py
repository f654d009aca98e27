"""Belief queries used while planning: fluent truth and robot geometry."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import Optional

import numpy as np

from ..belief.distributions import cov_dominates
from ..belief.state import BeliefState
from ..geometry import (
    Region,
    approach_pose,
    in_wedge,
    segment_distance,
    wedge_coverage,
    within_reach,
    wrap_angle,
)
from ..lang.ast import BBool, Const, Skolem, Var
from ..lang.evaluate import holds as lang_holds
from .fluents import Clear, HandEmpty, Holding, Near, Observed, PoseKnown

DEFAULT_RELIABILITY = {
    "MoveBase": 0.99,
    "Look": 0.97,
    "LookAtRegion": 0.97,
    "Pick": 0.95,
    "Place": 0.95,
    "Weigh": 0.98,
}


@dataclass(frozen=True)
class RuleParams:
    """Tunable constants of the rule library.

    ``examine_ratio`` and ``find_ratio`` scale the current plausibility of
    a candidate into the threshold its plan keeps as a precondition;
    ``contents_threshold`` is how well a region must be known before the
    search for an object in it counts as done.
    """

    reliability: dict = field(default_factory=lambda: dict(DEFAULT_RELIABILITY))
    examine_ratio: float = 0.1
    find_ratio: float = 1.0
    min_plausible: float = 0.001
    contents_threshold: float = 0.9
    search_miss_rate: float = 0.03
    place_confidence: float = 0.99
    type_confident: float = 0.95
    color_std: tuple = (0.05, 0.1, 0.1)
    weight_sigma: float = 0.15
    pose_std: float = 0.05
    existence_confirmed: float = 0.985
    near_tolerance: float = 0.25
    near_heading: float = 0.35
    reach_margin: float = 0.05
    clear_margin: float = 0.02
    slot_margin: float = 0.08
    slot_spacing: float = 0.12
    max_expansions: int = 50_000

    def __post_init__(self):
        rel = dict(DEFAULT_RELIABILITY)
        rel.update(self.reliability)
        for name, p in rel.items():
            if not (0.0 < p <= 1.0):
                raise ValueError(f"reliability of {name} must be in (0, 1]")
        object.__setattr__(self, "reliability", rel)
        for name in ("examine_ratio", "find_ratio", "contents_threshold", "place_confidence",
                     "type_confident", "existence_confirmed"):
            v = getattr(self, name)
            if not (0.0 < v <= 1.0):
                raise ValueError(f"{name} must be in (0, 1]")

    @classmethod
    def from_dict(cls, data: Optional[dict]) -> "RuleParams":
        if not data:
            return cls()
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown rule parameters: {sorted(unknown)}")
        kwargs = dict(data)
        for key in ("color_std",):
            if key in kwargs:
                kwargs[key] = tuple(kwargs[key])
        return cls(**kwargs)

    def as_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = list(v) if isinstance(v, tuple) else (dict(v) if isinstance(v, dict) else v)
        return out


def term_name(term) -> Optional[str]:
    """Anchor name of a ground term; None for Skolems and variables."""
    if isinstance(term, Const):
        return term.name
    if isinstance(term, str):
        return term
    return None


class PlanContext:
    """Memoised fluent evaluation and geometry for one planning belief."""

    def __init__(self, belief: BeliefState, params: RuleParams):
        self.belief = belief
        self.params = params
        self.sensor = belief.sensor
        self.regions = [belief.regions[k] for k in sorted(belief.regions)]
        base = belief.robot_pose.mean
        self.base = (float(base[0]), float(base[1]), float(base[3]))
        self._holds: dict = {}
        self._approach: dict = {}
        self._blockers: dict = {}

    # object and region lookups
    def is_object(self, term) -> bool:
        name = term_name(term)
        return name is not None and name in self.belief.objects

    def is_region(self, term) -> bool:
        name = term_name(term)
        return name is not None and name in self.belief.regions

    def object_names(self) -> list[str]:
        return self.belief.anchors()

    def xy(self, name: str) -> tuple[float, float]:
        m = self.belief.objects[name].pose_d.mean
        return (float(m[0]), float(m[1]))

    def approach(self, target: str) -> tuple[float, float, float]:
        """Base pose from which ``target`` is looked at and grasped."""
        if target not in self._approach:
            if target in self.belief.regions:
                pose = self.belief.regions[target].approach
            else:
                pose = approach_pose(self.xy(target), self.regions, self.sensor, self.base[:2])
            self._approach[target] = pose
        return self._approach[target]

    def near_from(self, base, target: str) -> bool:
        if target in self.belief.regions:
            ax, ay, ath = self.belief.regions[target].approach
            return (math.hypot(base[0] - ax, base[1] - ay) <= self.params.near_tolerance
                    and abs(wrap_angle(base[2] - ath)) <= self.params.near_heading)
        if target not in self.belief.objects or target == self.belief.held:
            return False
        p = self.xy(target)
        return in_wedge(base, p, self.sensor) and within_reach(base, p, self.sensor, self.params.reach_margin)

    def blockers(self, target: str) -> tuple[str, ...]:
        """Unheld objects whose footprint cuts the approach line to ``target``."""
        if target not in self._blockers:
            out = []
            if target in self.belief.objects and target != self.belief.held:
                eye = self.approach(target)
                goal = self.xy(target)
                radius = 2.0 * self.sensor.footprint + self.params.clear_margin
                for other in self.object_names():
                    if other in (target, self.belief.held):
                        continue
                    d, t = segment_distance(eye, goal, self.xy(other))
                    if 0.0 < t < 1.0 and d <= radius:
                        out.append(other)
            self._blockers[target] = tuple(out)
        return self._blockers[target]

    def predicted_contents(self, region: str) -> float:
        """Region confidence after one LookAtRegion from its inspection pose.

        A look cannot do better than the detector: coverage is discounted
        by the miss rate, so a searched region keeps a little residual mass.
        """
        reg = self.belief.regions[region]
        cov = wedge_coverage(reg.approach, reg, self.sensor) * (1.0 - self.params.search_miss_rate)
        c = self.belief.confidence(region)
        return 1.0 - (1.0 - c) * (1.0 - cov)

    def has_slot(self, region: str) -> bool:
        return place_slot(self.belief, region, self.belief.regions[region].approach, self.params) is not None

    # fluent truth
    def holds(self, f) -> bool:
        try:
            return self._holds[f]
        except KeyError:
            v = self._eval(f)
            self._holds[f] = v
            return v

    def _eval(self, f) -> bool:
        b = self.belief
        p = self.params
        if isinstance(f, HandEmpty):
            return b.held is None
        if isinstance(f, Holding):
            return b.held is not None and term_name(f.obj) == b.held
        name = None
        if isinstance(f, (Near, Clear, PoseKnown, Observed)):
            name = term_name(f.obj if not isinstance(f, Near) else f.target)
            if name is None:
                return False
        if isinstance(f, Near):
            return self.near_from(self.base, name)
        if isinstance(f, Clear):
            return name in b.objects and not self.blockers(name)
        if isinstance(f, PoseKnown):
            if name not in b.objects:
                return False
            if name == b.held:
                return True
            cov = b.objects[name].pose_d.cov[:3, :3]
            return cov_dominates(cov, np.eye(3) * p.pose_std ** 2)
        if isinstance(f, Observed):
            return name in b.objects and observed(b, name, f.dim, p)
        if isinstance(f, BBool) and _has_skolem(f):
            return False
        return lang_holds(f, b)


def _has_skolem(f: BBool) -> bool:
    phi = f.phi
    args = (phi.term,) if hasattr(phi, "term") else getattr(phi, "args", ())
    return any(isinstance(a, (Skolem, Var)) for a in args)


def observed(belief: BeliefState, name: str, dim: str, params: RuleParams) -> bool:
    """Low uncertainty on one property dimension of a confirmed object."""
    ob = belief.objects[name]
    if dim == "weight":
        # a grasp both confirms the object and measures it
        return ob.weight_d.sigma <= params.weight_sigma
    if ob.detection_weight < params.existence_confirmed:
        return False
    if dim == "type":
        return max(ob.type_d.probs.values()) >= params.type_confident
    if dim == "color":
        return cov_dominates(ob.color_d.cov, np.diag(np.square(params.color_std)))
    raise ValueError(f"unknown property dimension {dim!r}")


def place_slot(belief: BeliefState, region: str, base, params: RuleParams,
               exclude: Optional[str] = None) -> Optional[tuple[float, float]]:
    """Free resting point in ``region`` reachable from ``base``.

    Among grid points that stay clear of every known object and of every
    object's approach line, the point farthest from the known objects
    wins; ties break on grid order so the choice is deterministic.
    """
    reg: Region = belief.regions[region]
    sensor = belief.sensor
    others = [a for a in belief.anchors() if a not in (exclude, belief.held)]
    pts = {a: belief.objects[a].pose_d.mean[:2] for a in others}
    regions = [belief.regions[k] for k in sorted(belief.regions)]
    lines = []
    for a in others:
        eye = approach_pose(pts[a], regions, sensor, (base[0], base[1]))
        lines.append((eye, pts[a]))
    best, best_d = None, -1.0
    for g in reg.grid(9, margin=params.slot_margin):
        if not within_reach(base, g, sensor, params.reach_margin + 0.05):
            continue
        if not in_wedge(base, g, sensor):
            continue
        clearance = min((math.hypot(g[0] - p[0], g[1] - p[1]) for p in pts.values()), default=math.inf)
        if clearance < params.slot_spacing:
            continue
        if any(segment_distance(eye, tgt, g)[0] <= 2.0 * sensor.footprint + params.clear_margin
               and 0.0 < segment_distance(eye, tgt, g)[1] < 1.0 for eye, tgt in lines):
            continue
        if clearance > best_d + 1e-12:
            best, best_d = g, clearance
    return best
