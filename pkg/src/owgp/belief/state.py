"""Object-centric belief state and the vocabulary of ground relations."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional

import numpy as np

from ..geometry import Region, SensorModel
from .distributions import (
    BeliefError,
    ColorDistribution,
    PoseDistribution,
    TypeDistribution,
    WeightDistribution,
    is_psd,
)

_OBJECT_ANCHOR = re.compile(r"^_o(\d+)_$")
_REGION_ANCHOR = re.compile(r"^_reg(\d+)_$")

SPATIAL_RELATIONS = ("on", "in")
TRUE_RELATION = "true"
HEAVY = "heavy"


def anchor_kind(name: str) -> str:
    if _OBJECT_ANCHOR.match(name):
        return "object"
    if _REGION_ANCHOR.match(name):
        return "region"
    return "named-constant"


def anchor_sort_key(name: str):
    """Anchors order by kind, then numerically, so ``_o10_`` follows ``_o9_``."""
    m = _OBJECT_ANCHOR.match(name) or _REGION_ANCHOR.match(name)
    if m:
        return (0 if name.startswith("_o") else 1, int(m.group(1)), name)
    return (2, 0, name)


def object_anchor(n: int) -> str:
    return f"_o{n}_"


@dataclass(frozen=True)
class ColorBox:
    """A color name as a box in HSV space; the hue part may wrap."""

    hue: tuple[tuple[float, float], ...]
    sat: tuple[float, float] = (0.3, 1.0)
    val: tuple[float, float] = (0.2, 1.0)

    def __post_init__(self):
        object.__setattr__(self, "hue", tuple((float(a), float(b)) for a, b in self.hue))
        object.__setattr__(self, "sat", (float(self.sat[0]), float(self.sat[1])))
        object.__setattr__(self, "val", (float(self.val[0]), float(self.val[1])))

    def contains(self, hsv) -> bool:
        h, s, v = hsv
        in_hue = any(a <= h <= b for a, b in self.hue)
        return in_hue and self.sat[0] <= s <= self.sat[1] and self.val[0] <= v <= self.val[1]


DEFAULT_COLORS = {
    "green": ColorBox(((0.22, 0.45),)),
    "red": ColorBox(((0.95, 1.0), (0.0, 0.05))),
    "blue": ColorBox(((0.55, 0.70),)),
}


@dataclass(frozen=True)
class Vocabulary:
    """Declared relations and the priors attached to them."""

    types: tuple[str, ...]
    colors: Mapping[str, ColorBox] = field(default_factory=lambda: dict(DEFAULT_COLORS))
    heavy_grams: float = 400.0
    weight_prior_mu: float = math.log(250.0)
    weight_prior_sigma: float = 1.0
    new_detection_weight: float = 0.95
    redetection_factor: float = 0.2

    def __post_init__(self):
        object.__setattr__(self, "types", tuple(t.lower() for t in self.types))
        object.__setattr__(self, "colors", {k.lower(): v for k, v in self.colors.items()})
        clash = set(self.types) & set(self.colors)
        if clash:
            raise BeliefError(f"names declared both as type and color: {sorted(clash)}")
        reserved = {HEAVY, TRUE_RELATION, *SPATIAL_RELATIONS}
        if reserved & (set(self.types) | set(self.colors)):
            raise BeliefError(f"reserved relation names used: {sorted(reserved & (set(self.types) | set(self.colors)))}")

    def arity(self, rel: str) -> int:
        rel = rel.lower()
        if rel in SPATIAL_RELATIONS:
            return 2
        if rel in self.types or rel in self.colors or rel in (HEAVY, TRUE_RELATION):
            return 1
        raise BeliefError(f"unknown relation {rel!r}")

    def dimension(self, rel: str) -> Optional[str]:
        """Which observable property a unary relation talks about."""
        rel = rel.lower()
        if rel in self.types:
            return "type"
        if rel in self.colors:
            return "color"
        if rel == HEAVY:
            return "weight"
        return None

    def is_relation(self, rel: str) -> bool:
        try:
            self.arity(rel)
        except BeliefError:
            return False
        return True

    def weight_prior(self) -> WeightDistribution:
        return WeightDistribution(self.weight_prior_mu, self.weight_prior_sigma)


@dataclass(frozen=True)
class ObjectBelief:
    anchor: str
    type_d: TypeDistribution
    pose_d: PoseDistribution
    color_d: ColorDistribution
    weight_d: WeightDistribution
    detection_weight: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.detection_weight <= 1.0):
            raise BeliefError(f"{self.anchor}: detection weight must be in (0, 1]")


@dataclass(frozen=True, eq=False)
class ObservationNoiseModel:
    """Sensor noise; confusion rows are indexed in vocabulary type order."""

    types: tuple[str, ...]
    type_confusion: np.ndarray
    pose_obs_cov: np.ndarray
    color_obs_cov: np.ndarray
    weight_obs_sigma: float = 0.05
    false_negative_rate: float = 0.03

    def __post_init__(self):
        conf = np.array(self.type_confusion, dtype=float)
        n = len(self.types)
        if conf.shape != (n, n):
            raise BeliefError("confusion matrix must be square over the type set")
        if np.any(conf < 0) or np.any(np.abs(conf.sum(axis=1) - 1.0) > 1e-9):
            raise BeliefError("confusion rows must be probability vectors")
        pose = np.array(self.pose_obs_cov, dtype=float)
        color = np.array(self.color_obs_cov, dtype=float)
        if pose.shape != (4, 4) or color.shape != (3, 3):
            raise BeliefError("observation covariances have the wrong shape")
        if not (is_psd(pose) and is_psd(color)):
            raise BeliefError("observation covariances must be PSD")
        if not (0.0 <= self.false_negative_rate < 1.0):
            raise BeliefError("false negative rate must be in [0, 1)")
        if not (self.weight_obs_sigma > 0):
            raise BeliefError("weight observation sigma must be positive")
        for arr in (conf, pose, color):
            arr.setflags(write=False)
        object.__setattr__(self, "types", tuple(self.types))
        object.__setattr__(self, "type_confusion", conf)
        object.__setattr__(self, "pose_obs_cov", pose)
        object.__setattr__(self, "color_obs_cov", color)

    @classmethod
    def diagonal(cls, types, accuracy=0.9, pose_std=(0.03, 0.03, 0.03, 0.05),
                 color_std=(0.02, 0.05, 0.05), weight_obs_sigma=0.05,
                 false_negative_rate=0.03) -> "ObservationNoiseModel":
        n = len(types)
        if n == 1:
            conf = np.ones((1, 1))
        else:
            conf = np.full((n, n), (1.0 - accuracy) / (n - 1))
            np.fill_diagonal(conf, accuracy)
        return cls(tuple(types), conf, np.diag(np.square(pose_std)), np.diag(np.square(color_std)),
                   weight_obs_sigma, false_negative_rate)

    def __eq__(self, other):
        if not isinstance(other, ObservationNoiseModel):
            return NotImplemented
        return (self.types == other.types
                and np.array_equal(self.type_confusion, other.type_confusion)
                and np.array_equal(self.pose_obs_cov, other.pose_obs_cov)
                and np.array_equal(self.color_obs_cov, other.color_obs_cov)
                and self.weight_obs_sigma == other.weight_obs_sigma
                and self.false_negative_rate == other.false_negative_rate)

    __hash__ = None

    def likelihood(self, observed_type: str) -> dict[str, float]:
        if observed_type not in self.types:
            raise BeliefError(f"unknown type {observed_type!r}")
        j = self.types.index(observed_type)
        return {t: float(self.type_confusion[i, j]) for i, t in enumerate(self.types)}


@dataclass(frozen=True)
class BeliefState:
    """Immutable snapshot of what the robot believes.

    ``objects`` and the region maps are never mutated; every update builds
    a new state with :func:`dataclasses.replace`.
    """

    objects: Mapping[str, ObjectBelief]
    robot_pose: PoseDistribution
    vocab: Vocabulary
    regions: Mapping[str, Region] = field(default_factory=dict)
    region_confidence: Mapping[str, float] = field(default_factory=dict)
    region_priors: Mapping[str, float] = field(default_factory=dict)
    held: Optional[str] = None
    sensor: SensorModel = field(default_factory=SensorModel)
    next_id: int = 1

    def __post_init__(self):
        if self.held is not None and self.held not in self.objects:
            raise BeliefError(f"held anchor {self.held!r} is not a known object")
        for name, c in self.region_confidence.items():
            if not (0.0 <= c <= 1.0):
                raise BeliefError(f"region confidence for {name} outside [0, 1]")
        for name, p in self.region_priors.items():
            if not (0.0 <= p <= 1.0):
                raise BeliefError(f"region prior for {name} outside [0, 1]")
        overlap = set(self.objects) & set(self.regions)
        if overlap:
            raise BeliefError(f"anchors used for both objects and regions: {sorted(overlap)}")
        used = [int(a[2:-1]) for a in self.objects if anchor_kind(a) == "object"]
        floor = max(used, default=0) + 1
        if self.next_id < floor:
            object.__setattr__(self, "next_id", floor)

    def obj(self, anchor: str) -> ObjectBelief:
        try:
            return self.objects[anchor]
        except KeyError:
            raise BeliefError(f"unknown anchor {anchor!r}") from None

    def region(self, name: str) -> Region:
        try:
            return self.regions[name]
        except KeyError:
            raise BeliefError(f"unknown region {name!r}") from None

    def anchors(self) -> list[str]:
        return sorted(self.objects, key=anchor_sort_key)

    def with_object(self, ob: ObjectBelief) -> "BeliefState":
        objects = dict(self.objects)
        objects[ob.anchor] = ob
        return replace(self, objects=objects)

    def fresh_anchor(self) -> tuple["BeliefState", str]:
        n = self.next_id
        while object_anchor(n) in self.objects or object_anchor(n) in self.regions:
            n += 1
        return replace(self, next_id=n + 1), object_anchor(n)

    def confidence(self, region: str) -> float:
        self.region(region)
        return float(self.region_confidence.get(region, 0.0))
