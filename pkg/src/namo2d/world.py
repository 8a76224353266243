"""Simulated world: static map polygons, robot base, and movable objects."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .affordance import Movability
from .core import Polygon, Pose2
from .dynamics import ObjectProps


@dataclass(frozen=True)
class Shape3:
    """3D shape descriptor used for point-cloud synthesis.

    kind 'box' uses (w, d, h); 'cylinder' uses (r, h); 'sphere' uses r.
    The shape sits on the ground in its body frame, centered at the
    origin in x/y.
    """

    kind: str
    w: float = 0.0
    d: float = 0.0
    h: float = 0.0
    r: float = 0.0

    def footprint(self, circle_segments: int = 16) -> Polygon:
        if self.kind == "box":
            hw, hd = self.w / 2, self.d / 2
            return Polygon([(-hw, -hd), (hw, -hd), (hw, hd), (-hw, hd)])
        if self.kind in ("cylinder", "sphere"):
            ang = np.arange(circle_segments) * (2 * math.pi / circle_segments)
            return Polygon(np.stack([self.r * np.cos(ang),
                                     self.r * np.sin(ang)], axis=1))
        raise ValueError(f"unknown shape kind {self.kind!r}")

    def default_inertia(self, mass: float) -> float:
        if self.kind == "box":
            return mass * (self.w ** 2 + self.d ** 2) / 12.0
        return 0.5 * mass * self.r ** 2


@dataclass
class WorldObject:
    name: str
    shape: Shape3
    props: ObjectProps
    pose: Pose2
    vel: np.ndarray = field(default_factory=lambda: np.zeros(3))
    known: bool = False                 # registered on the global map
    movability: Movability = Movability.UNKNOWN

    def world_footprint(self) -> Polygon:
        return self.props.footprint.transformed(self.pose)


@dataclass
class World:
    bounds: tuple                       # (xmin, ymin, xmax, ymax)
    static_polygons: list = field(default_factory=list)
    objects: list = field(default_factory=list)
    robot_pose: Pose2 = Pose2(0.0, 0.0, 0.0)
    robot_radius: float = 0.25
    robot_vel: np.ndarray = field(default_factory=lambda: np.zeros(3))
    sensor_height: float = 1.0
    probe_count: int = 0
    sim_time: float = 0.0

    def unknown_objects(self):
        return [o for o in self.objects if not o.known]

    def object_index(self, obj: WorldObject) -> int:
        return self.objects.index(obj)

    def copy_poses(self):
        return [(o.pose, o.vel.copy()) for o in self.objects]
