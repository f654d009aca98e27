"""Scenario files: one YAML document describing world, belief, goal and knobs.

Validation errors name the offending field path, e.g.
``regions.1.prior: Input should be less than or equal to 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .belief.distributions import ColorDistribution, PoseDistribution, TypeDistribution, WeightDistribution
from .belief.state import BeliefState, ColorBox, ObjectBelief, ObservationNoiseModel, Vocabulary, anchor_kind
from .belief.updates import DEFAULT_GATE
from .executive import Limits
from .geometry import Region, SensorModel
from .lang.ast import GoalFormula
from .lang.parser import parse_goal
from .planner.domain import RuleParams
from .sim import REST_HEIGHT, WorldObject, WorldState

Prob = Field(ge=0.0, le=1.0)


class ScenarioError(ValueError):
    pass


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ColorSpec(_Model):
    hue: list[tuple[float, float]]
    sat: tuple[float, float] = (0.3, 1.0)
    val: tuple[float, float] = (0.2, 1.0)


class VocabularySpec(_Model):
    types: list[str] = Field(min_length=1)
    colors: Optional[dict[str, ColorSpec]] = None
    heavy_grams: float = Field(default=400.0, gt=0)
    weight_prior_grams: float = Field(default=250.0, gt=0)
    weight_prior_sigma: float = Field(default=1.0, gt=0)
    new_detection_weight: float = Field(default=0.95, gt=0, le=1)
    redetection_factor: float = Field(default=0.2, ge=0, le=1)


class SensorSpec(_Model):
    fov_deg: float = Field(default=60.0, gt=0, le=360)
    range: float = Field(default=2.5, gt=0)
    reach: float = Field(default=0.9, gt=0)
    standoff: float = Field(default=0.6, gt=0)
    footprint: float = Field(default=0.05, gt=0)


class RegionSpec(_Model):
    name: str
    min: tuple[float, float, float]
    max: tuple[float, float, float]
    approach: tuple[float, float, float]
    prior: float = Prob
    confidence: float = Prob

    @model_validator(mode="after")
    def _box(self):
        if any(hi <= lo for lo, hi in zip(self.min, self.max)):
            raise ValueError("max corner must exceed min corner on every axis")
        return self


class WorldObjectSpec(_Model):
    id: str
    type: str
    region: str
    xy: tuple[float, float]
    theta: float = 0.0
    hsv: tuple[float, float, float]
    grams: float = Field(gt=0)

    @field_validator("hsv")
    @classmethod
    def _unit(cls, v):
        if any(not (0.0 <= c <= 1.0) for c in v):
            raise ValueError("hsv components must lie in [0, 1]")
        return v


class GaussianSpec(_Model):
    mean: Optional[list[float]] = None
    std: list[float]


class WeightSpec(_Model):
    grams: float = Field(gt=0)
    sigma: float = Field(gt=0)


class BeliefObjectSpec(_Model):
    anchor: str
    world: Optional[str] = None
    type: dict[str, float]
    pose: GaussianSpec
    color: GaussianSpec
    weight: Optional[WeightSpec] = None
    exists: float = Field(default=1.0, gt=0, le=1)

    @field_validator("type")
    @classmethod
    def _probs(cls, v):
        if any(not (0.0 <= p <= 1.0) for p in v.values()):
            raise ValueError("type probabilities must lie in [0, 1]")
        if abs(sum(v.values()) - 1.0) > 1e-9:
            raise ValueError("type probabilities must sum to 1")
        return v


class NoiseSpec(_Model):
    type_accuracy: float = Field(default=0.9, gt=0, le=1)
    pose_std: tuple[float, float, float, float] = (0.03, 0.03, 0.03, 0.05)
    color_std: tuple[float, float, float] = (0.02, 0.05, 0.05)
    weight_sigma: float = Field(default=0.05, gt=0)
    false_negative_rate: float = Field(default=0.03, ge=0, lt=1)


class RobotSpec(_Model):
    pose: tuple[float, float, float]


class BudgetSpec(_Model):
    max_primitives: int = Field(default=200, gt=0)
    max_replans: int = Field(default=25, ge=0)


class ScenarioSpec(_Model):
    name: str
    description: str = ""
    vocabulary: VocabularySpec
    sensor: SensorSpec = SensorSpec()
    robot: RobotSpec
    regions: list[RegionSpec]
    world: list[WorldObjectSpec] = []
    belief: list[BeliefObjectSpec] = []
    noise: NoiseSpec = NoiseSpec()
    rules: dict = {}
    gate: float = Field(default=DEFAULT_GATE, gt=0)
    budgets: BudgetSpec = BudgetSpec()
    goal: str

    @model_validator(mode="after")
    def _refs(self):
        regions = [r.name for r in self.regions]
        if len(set(regions)) != len(regions):
            raise ValueError("duplicate region names")
        types = set(t.lower() for t in self.vocabulary.types)
        ids = [w.id for w in self.world]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate world object ids")
        for w in self.world:
            if w.region not in regions:
                raise ValueError(f"world object {w.id} rests on unknown region {w.region}")
            if w.type.lower() not in types:
                raise ValueError(f"world object {w.id} has undeclared type {w.type}")
        anchors = [b.anchor for b in self.belief]
        if len(set(anchors)) != len(anchors):
            raise ValueError("duplicate belief anchors")
        for b in self.belief:
            if anchor_kind(b.anchor) != "object":
                raise ValueError(f"belief anchor {b.anchor} must look like _oN_")
            if b.world is not None and b.world not in ids:
                raise ValueError(f"belief anchor {b.anchor} refers to unknown world object {b.world}")
            if b.world is None and b.pose.mean is None:
                raise ValueError(f"belief anchor {b.anchor} needs a pose mean or a world object")
            if set(t.lower() for t in b.type) != types:
                raise ValueError(f"belief anchor {b.anchor} must give a probability for every type")
        try:
            RuleParams.from_dict(self.rules)
        except (TypeError, ValueError) as exc:
            raise ValueError(f"rules: {exc}") from None
        return self


@dataclass
class Scenario:
    spec: ScenarioSpec
    world: WorldState
    belief: BeliefState
    goal: GoalFormula
    params: RuleParams
    noise: ObservationNoiseModel
    limits: Limits
    gate: float

    @property
    def name(self) -> str:
        return self.spec.name


def _vocabulary(spec: VocabularySpec) -> Vocabulary:
    kwargs = {}
    if spec.colors is not None:
        kwargs["colors"] = {k: ColorBox(tuple(c.hue), c.sat, c.val) for k, c in spec.colors.items()}
    return Vocabulary(tuple(spec.types), heavy_grams=spec.heavy_grams,
                      weight_prior_mu=math.log(spec.weight_prior_grams),
                      weight_prior_sigma=spec.weight_prior_sigma,
                      new_detection_weight=spec.new_detection_weight,
                      redetection_factor=spec.redetection_factor, **kwargs)


def build(spec: ScenarioSpec) -> Scenario:
    """Construct run inputs from a validated spec."""
    vocab = _vocabulary(spec.vocabulary)
    sensor = SensorModel(**spec.sensor.model_dump())
    regions = {r.name: Region(r.name, r.min, r.max, r.approach) for r in spec.regions}
    noise = ObservationNoiseModel.diagonal(vocab.types, spec.noise.type_accuracy, spec.noise.pose_std,
                                           spec.noise.color_std, spec.noise.weight_sigma,
                                           spec.noise.false_negative_rate)
    objects = {}
    for w in spec.world:
        reg = regions[w.region]
        pose = (w.xy[0], w.xy[1], reg.surface_z + REST_HEIGHT, w.theta)
        objects[w.id] = WorldObject(w.id, w.type.lower(), pose, w.hsv, w.grams, w.region)
    x, y, th = spec.robot.pose
    world = WorldState(objects, (x, y, th), regions, noise, sensor)

    beliefs = {}
    for b in spec.belief:
        mean = b.pose.mean if b.pose.mean is not None else list(objects[b.world].pose)
        cmean = b.color.mean if b.color.mean is not None else list(objects[b.world].hsv)
        weight = (WeightDistribution.grams(b.weight.grams, b.weight.sigma) if b.weight
                  else vocab.weight_prior())
        beliefs[b.anchor] = ObjectBelief(
            b.anchor,
            TypeDistribution({t.lower(): p for t, p in b.type.items()}),
            PoseDistribution.from_std(mean, b.pose.std),
            ColorDistribution.from_std(cmean, b.color.std),
            weight,
            b.exists,
        )
    robot = PoseDistribution.from_std((x, y, 0.0, th), (0.01, 0.01, 0.01, 0.01))
    belief = BeliefState(
        beliefs, robot, vocab, regions,
        {r.name: r.confidence for r in spec.regions},
        {r.name: r.prior for r in spec.regions},
        None, sensor,
    )
    try:
        goal = parse_goal(spec.goal, vocab)
    except ValueError as exc:
        raise ScenarioError(f"goal: {exc}") from exc
    for name in _goal_constants(goal):
        if name not in regions and name not in beliefs:
            raise ScenarioError(f"goal: unknown constant {name!r}")
    rules = dict(spec.rules)
    rules.setdefault("search_miss_rate", spec.noise.false_negative_rate)
    return Scenario(spec, world, belief, goal, RuleParams.from_dict(rules), noise,
                    Limits(spec.budgets.max_primitives, spec.budgets.max_replans), spec.gate)


def _goal_constants(goal: GoalFormula) -> set[str]:
    from .lang.ast import BContents, Const, ExistsInRegion, terms_of

    names = {t.name for t in terms_of(goal.fluents) if isinstance(t, Const)}
    for f in goal.fluents:
        if isinstance(f, (BContents, ExistsInRegion)):
            names.add(f.region)
    return names


def _format_validation(exc: ValidationError) -> str:
    lines = []
    for err in exc.errors():
        path = ".".join(str(p) for p in err["loc"]) or "<root>"
        lines.append(f"{path}: {err['msg']}")
    return "; ".join(lines)


def parse_scenario(data: dict) -> ScenarioSpec:
    try:
        return ScenarioSpec.model_validate(data)
    except ValidationError as exc:
        raise ScenarioError(_format_validation(exc)) from None


def bundled_path(name: str) -> Optional[Path]:
    stem = name[:-4] if name.endswith(".scn") else name
    ref = resources.files("owgp") / "scenarios" / f"{stem}.scn"
    return Path(str(ref)) if ref.is_file() else None


def bundled_names() -> list[str]:
    root = resources.files("owgp") / "scenarios"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".scn"))


def resolve(path_or_name: str) -> Path:
    p = Path(path_or_name)
    if p.is_file():
        return p
    bundled = bundled_path(p.name)
    if bundled is not None:
        return bundled
    raise ScenarioError(f"scenario not found: {path_or_name}")


def load_spec(path_or_name: str) -> ScenarioSpec:
    path = resolve(path_or_name)
    try:
        data = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ScenarioError(f"{path}: not valid YAML: {exc}") from None
    if not isinstance(data, dict):
        raise ScenarioError(f"{path}: expected a mapping at the top level")
    return parse_scenario(data)


def load_scenario(path_or_name: str) -> Scenario:
    """Load a scenario file (or a bundled scenario by name)."""
    return build(load_spec(path_or_name))


def dump_spec(spec: ScenarioSpec) -> str:
    data = spec.model_dump(mode="json", exclude_none=True)
    return yaml.safe_dump(data, sort_keys=False)


def load_rules(path: str) -> dict:
    """Rule-library file: the ``rules`` mapping, optionally at top level."""
    try:
        data = yaml.safe_load(Path(path).read_text())
    except (OSError, yaml.YAMLError) as exc:
        raise ScenarioError(f"{path}: {exc}") from None
    if isinstance(data, dict) and "rules" in data:
        data = data["rules"]
    if not isinstance(data, dict):
        raise ScenarioError(f"{path}: expected a mapping of rule parameters")
    try:
        RuleParams.from_dict(data)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"{path}: {exc}") from None
    return data


def initial_arrays(scn: Scenario) -> dict:
    """Ground-truth object positions keyed by world id (handy for reports)."""
    return {k: np.array(v.pose) for k, v in scn.world.objects.items()}
