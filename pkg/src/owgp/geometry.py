"""Planar geometry shared by the belief, the planner and the simulator.

Everything here works on the table-top plane: robot base poses are
``(x, y, theta)`` and object footprints are discs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


def wrap_angle(theta: float) -> float:
    """Map an angle onto (-pi, pi]."""
    wrapped = math.pi - math.fmod(math.pi - theta, 2.0 * math.pi)
    if wrapped > math.pi:
        wrapped -= 2.0 * math.pi
    elif wrapped <= -math.pi:
        wrapped += 2.0 * math.pi
    return wrapped


def wrap_unit(h: float) -> float:
    """Map a circular coordinate with period 1 onto [0, 1)."""
    h = math.fmod(h, 1.0)
    if h < 0.0:
        h += 1.0
    if h >= 1.0:
        h = 0.0
    return h


def wrap_half(d: float) -> float:
    """Shortest signed difference on a unit circle, in (-0.5, 0.5]."""
    d = math.fmod(d, 1.0)
    if d > 0.5:
        d -= 1.0
    elif d <= -0.5:
        d += 1.0
    return d


@dataclass(frozen=True)
class SensorModel:
    """Robot capabilities: camera wedge, arm reach and approach geometry."""

    fov_deg: float = 60.0
    range: float = 2.5
    reach: float = 0.9
    standoff: float = 0.6
    footprint: float = 0.05

    @property
    def half_fov(self) -> float:
        return math.radians(self.fov_deg) / 2.0


@dataclass(frozen=True, eq=False)
class Region:
    """Axis-aligned box with the base pose from which it is inspected."""

    name: str
    lo: np.ndarray
    hi: np.ndarray
    approach: tuple[float, float, float]
    surface_z: float = field(default=float("nan"))

    def __post_init__(self):
        lo = np.array(self.lo, dtype=float)
        hi = np.array(self.hi, dtype=float)
        if lo.shape != (3,) or hi.shape != (3,):
            raise ValueError(f"region {self.name}: corners must be 3-vectors")
        if np.any(hi <= lo):
            raise ValueError(f"region {self.name}: min corner must be strictly below max corner")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "approach", tuple(float(v) for v in self.approach))
        if math.isnan(self.surface_z):
            object.__setattr__(self, "surface_z", float(lo[2]))

    def __eq__(self, other):
        if not isinstance(other, Region):
            return NotImplemented
        return (self.name == other.name and np.array_equal(self.lo, other.lo)
                and np.array_equal(self.hi, other.hi) and self.approach == other.approach
                and self.surface_z == other.surface_z)

    def __hash__(self):
        return hash(self.name)

    @property
    def center(self) -> np.ndarray:
        return (self.lo + self.hi) / 2.0

    def contains_xy(self, xy, margin: float = 0.0) -> bool:
        return bool(self.lo[0] + margin <= xy[0] <= self.hi[0] - margin
                    and self.lo[1] + margin <= xy[1] <= self.hi[1] - margin)

    def contains(self, p) -> bool:
        return bool(np.all(self.lo <= p[:3]) and np.all(p[:3] <= self.hi))

    def grid(self, n: int = 11, margin: float = 0.0) -> list[tuple[float, float]]:
        xs = np.linspace(self.lo[0] + margin, self.hi[0] - margin, n)
        ys = np.linspace(self.lo[1] + margin, self.hi[1] - margin, n)
        return [(float(x), float(y)) for y in ys for x in xs]


def in_wedge(base, point, sensor: SensorModel) -> bool:
    dx = point[0] - base[0]
    dy = point[1] - base[1]
    dist = math.hypot(dx, dy)
    if dist > sensor.range:
        return False
    if dist < 1e-9:
        return True
    return abs(wrap_angle(math.atan2(dy, dx) - base[2])) <= sensor.half_fov


def within_reach(base, point, sensor: SensorModel, margin: float = 0.0) -> bool:
    return math.hypot(point[0] - base[0], point[1] - base[1]) <= sensor.reach - margin


def segment_distance(a, b, p) -> tuple[float, float]:
    """Distance from ``p`` to segment ``ab`` and the projection parameter."""
    ax, ay = a[0], a[1]
    vx, vy = b[0] - ax, b[1] - ay
    denom = vx * vx + vy * vy
    if denom < 1e-18:
        return math.hypot(p[0] - ax, p[1] - ay), 0.0
    t = ((p[0] - ax) * vx + (p[1] - ay) * vy) / denom
    tc = min(1.0, max(0.0, t))
    return math.hypot(p[0] - (ax + tc * vx), p[1] - (ay + tc * vy)), t


def blocks_sight(eye, target, other, radius: float) -> bool:
    """True when a disc at ``other`` cuts the line of sight eye -> target."""
    d, t = segment_distance(eye, target, other)
    return 0.0 < t < 1.0 and d <= radius


def approach_pose(point, regions, sensor: SensorModel, fallback_from=None) -> tuple[float, float, float]:
    """Base pose facing ``point`` from the heading of the region it sits in.

    Points outside every region are approached along the line from
    ``fallback_from`` (usually the current base position).
    """
    heading = None
    for region in regions:
        if region.contains_xy(point):
            heading = region.approach[2]
            break
    if heading is None:
        src = fallback_from if fallback_from is not None else (0.0, 0.0)
        heading = math.atan2(point[1] - src[1], point[0] - src[0])
    return (float(point[0] - sensor.standoff * math.cos(heading)),
            float(point[1] - sensor.standoff * math.sin(heading)),
            float(wrap_angle(heading)))


def wedge_coverage(base, region: Region, sensor: SensorModel, n: int = 11) -> float:
    """Fraction of the region's footprint grid that lies inside the view wedge."""
    pts = region.grid(n)
    inside = sum(1 for p in pts if in_wedge(base, p, sensor))
    return inside / len(pts)
