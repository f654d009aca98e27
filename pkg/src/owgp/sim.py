"""Seeded ground-truth world: object dynamics and noisy camera/scale readings."""
from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .belief.state import ObservationNoiseModel
from .belief.updates import Detection
from .geometry import Region, SensorModel, blocks_sight, in_wedge, wedge_coverage, within_reach, wrap_angle, wrap_unit

REST_HEIGHT = 0.06
GRASP_TOLERANCE = 0.15
ACTIONS = ("MoveBase", "Look", "LookAtRegion", "Pick", "Place", "Weigh")


@dataclass(frozen=True, eq=False)
class WorldObject:
    id: str
    type: str
    pose: np.ndarray
    hsv: tuple[float, float, float]
    grams: float
    surface: Optional[str] = None

    def __post_init__(self):
        pose = np.array(self.pose, dtype=float)
        if pose.shape != (4,):
            raise ValueError(f"{self.id}: pose must be (x, y, z, theta)")
        pose[3] = wrap_angle(pose[3])
        pose.setflags(write=False)
        object.__setattr__(self, "pose", pose)
        object.__setattr__(self, "hsv", tuple(float(v) for v in self.hsv))
        if not self.grams > 0:
            raise ValueError(f"{self.id}: weight must be positive")

    def __eq__(self, other):
        if not isinstance(other, WorldObject):
            return NotImplemented
        return (self.id == other.id and self.type == other.type and np.array_equal(self.pose, other.pose)
                and self.hsv == other.hsv and self.grams == other.grams and self.surface == other.surface)

    __hash__ = None


@dataclass(frozen=True)
class Action:
    """A ground command in world coordinates.

    ``point`` is the believed location of the target object (Look, Pick)
    or the chosen resting point (Place); ``pose`` is the base goal for
    MoveBase; ``region`` names the region for LookAtRegion and Place.
    """

    name: str
    pose: Optional[tuple] = None
    point: Optional[tuple] = None
    region: Optional[str] = None

    def __post_init__(self):
        if self.name not in ACTIONS:
            raise ValueError(f"unknown action {self.name!r}")
        if self.name == "MoveBase" and (self.pose is None or len(self.pose) != 3):
            raise ValueError("MoveBase needs a base pose (x, y, theta)")
        if self.name in ("Pick", "Place") and self.point is None:
            raise ValueError(f"{self.name} needs a target point")
        if self.name in ("LookAtRegion", "Place") and self.region is None:
            raise ValueError(f"{self.name} needs a region")


@dataclass(frozen=True)
class Detections:
    items: tuple = ()
    region: Optional[str] = None
    coverage: Optional[float] = None


@dataclass(frozen=True)
class Weight:
    grams: float


@dataclass(frozen=True)
class ActionFailed:
    reason: str


@dataclass(frozen=True)
class Null:
    pass


@dataclass
class WorldState:
    objects: dict
    base: tuple
    regions: dict
    noise: ObservationNoiseModel
    sensor: SensorModel = field(default_factory=SensorModel)
    held: Optional[str] = None
    rng: np.random.Generator = field(default_factory=lambda: np.random.Generator(np.random.PCG64(0)))

    def __post_init__(self):
        if self.held is not None and self.held not in self.objects:
            raise ValueError("held object is not in the world")
        self.base = (float(self.base[0]), float(self.base[1]), wrap_angle(float(self.base[2])))

    def copy(self) -> "WorldState":
        return replace(self, objects=dict(self.objects), rng=copy.deepcopy(self.rng))

    def seeded(self, seed: int) -> "WorldState":
        return replace(self, objects=dict(self.objects), rng=np.random.Generator(np.random.PCG64(seed)))

    def region_of(self, obj_id: str) -> Optional[str]:
        ob = self.objects[obj_id]
        if obj_id == self.held:
            return None
        for name in sorted(self.regions):
            if self.regions[name].contains(ob.pose):
                return name
        return None


def _visible(world: WorldState, obj_id: str) -> bool:
    ob = world.objects[obj_id]
    if obj_id == world.held or not in_wedge(world.base, ob.pose, world.sensor):
        return False
    for other_id in sorted(world.objects):
        if other_id in (obj_id, world.held):
            continue
        if blocks_sight(world.base, ob.pose, world.objects[other_id].pose, world.sensor.footprint):
            return False
    return True


def _factor(cov: np.ndarray) -> np.ndarray:
    """Square-root factor L with L L^T = cov; also fine for singular cov."""
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        vals, vecs = np.linalg.eigh(cov)
        return vecs * np.sqrt(np.clip(vals, 0.0, None))


def observe_look(world: WorldState) -> Detections:
    """Noisy detections of every unheld, unoccluded object in the wedge.

    Advances ``world.rng`` in place; the draw order is fixed (objects by
    id, then miss / type / pose / color) so runs are reproducible.
    """
    noise, rng = world.noise, world.rng
    items = []
    for obj_id in sorted(world.objects):
        if not _visible(world, obj_id):
            continue
        ob = world.objects[obj_id]
        miss = rng.random() < noise.false_negative_rate
        row = noise.type_confusion[noise.types.index(ob.type)]
        t = noise.types[int(rng.choice(len(noise.types), p=row))]
        dp = _factor(noise.pose_obs_cov) @ rng.standard_normal(4)
        dc = _factor(noise.color_obs_cov) @ rng.standard_normal(3)
        if miss:
            continue
        pose = ob.pose + dp
        pose[3] = wrap_angle(pose[3])
        h, s, v = ob.hsv + dc
        hsv = (wrap_unit(h), min(1.0, max(0.0, s)), min(1.0, max(0.0, v)))
        items.append(Detection(t, pose, hsv))
    return Detections(tuple(items))


def step(world: WorldState, action: Action) -> tuple[WorldState, object]:
    """Apply ``action`` to a copy of ``world``; returns (world', observation)."""
    w = world.copy()
    obs = _apply(w, action)
    return w, obs


def _apply(w: WorldState, action: Action):
    sensor = w.sensor
    if action.name == "MoveBase":
        w.base = (float(action.pose[0]), float(action.pose[1]), wrap_angle(float(action.pose[2])))
        return Null()
    if action.name == "Look":
        return observe_look(w)
    if action.name == "LookAtRegion":
        if action.region not in w.regions:
            return ActionFailed(f"unknown region {action.region}")
        det = observe_look(w)
        return Detections(det.items, action.region, wedge_coverage(w.base, w.regions[action.region], sensor))
    if action.name == "Pick":
        if w.held is not None:
            return ActionFailed("hand is not empty")
        target = None
        best = GRASP_TOLERANCE
        for obj_id in sorted(w.objects):
            d = math.hypot(w.objects[obj_id].pose[0] - action.point[0], w.objects[obj_id].pose[1] - action.point[1])
            if d <= best:
                target, best = obj_id, d
        if target is None:
            return ActionFailed("nothing at the grasp point")
        ob = w.objects[target]
        if not (within_reach(w.base, ob.pose, sensor) and _visible(w, target)):
            return ActionFailed("target out of reach or out of view")
        w.held = target
        w.objects[target] = replace(ob, surface=None)
        return Weight(_weigh(w, ob))
    if action.name == "Weigh":
        if w.held is None:
            return ActionFailed("nothing held")
        return Weight(_weigh(w, w.objects[w.held]))
    if action.name == "Place":
        if w.held is None:
            return ActionFailed("nothing held")
        region: Region = w.regions.get(action.region)
        if region is None or not region.contains_xy(action.point):
            return ActionFailed("placement point outside the region")
        if not within_reach(w.base, action.point, sensor):
            return ActionFailed("placement point out of reach")
        ob = w.objects[w.held]
        pose = np.array([action.point[0], action.point[1], region.surface_z + REST_HEIGHT, ob.pose[3]])
        w.objects[w.held] = replace(ob, pose=pose, surface=action.region)
        w.held = None
        return Null()
    raise ValueError(f"unknown action {action.name!r}")


def _weigh(w: WorldState, ob: WorldObject) -> float:
    return float(ob.grams * math.exp(w.rng.normal(0.0, w.noise.weight_obs_sigma)))


class Simulator:
    """Mutable handle owned by one executive run."""

    def __init__(self, world: WorldState, seed: Optional[int] = None):
        self.world = world.seeded(seed) if seed is not None else world.copy()
        self.log: list = []

    def step(self, action: Action):
        self.world, obs = step(self.world, action)
        self.log.append((action, obs))
        return obs
