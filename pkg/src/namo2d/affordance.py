"""Movability hypotheses, simulated wrench probes, and obstacle binding.

Primitives host lift/push hypotheses per the rule table below; validation
probes the simulated object with a wrench-threshold check. All hypotheses
of one obstacle share the validation result, and lift is always tried
before push.

Rule table (all thresholds robot-specific):
  cylinder: lift if r < c1,              push if r < c2
  plane:    lift if d < c3 (vertical n), push if d*h < c4 (vertical n)
  sphere:   lift if r < c5,              push if r < c6
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .core import Polygon
from .dynamics import GRAVITY
from .errors import NoLiftHypothesis, NoPushHypothesis
from .perception import CYLINDER, PLANE, SPHERE, Primitive

LIFT = "lift"
PUSH = "push"


class Movability(Enum):
    UNKNOWN = "unknown"
    LIFTABLE = "liftable"
    PUSHABLE = "pushable"
    UNMOVABLE = "unmovable"


@dataclass
class RobotCapabilities:
    c1: float = 0.05        # m, cylinder lift radius
    c2: float = 0.60        # m, cylinder push radius
    c3: float = 0.12        # m, plane lift width
    c4: float = 0.50        # m^2, plane push area d*h
    c5: float = 0.12        # m, sphere lift radius
    c6: float = 0.40        # m, sphere push radius
    f_L: float = 20.0       # N, max lift resistance
    f_P: float = 25.0       # N, max push resistance
    perp_tol: float = math.radians(10.0)

    def __post_init__(self):
        for name in ("c1", "c2", "c3", "c4", "c5", "c6", "f_L", "f_P", "perp_tol"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class AffordanceHypothesis:
    kind: str               # LIFT or PUSH
    primitive_id: int
    rank: int               # lift ranks before push


@dataclass
class AffordanceObstacle:
    """Footprint + primitives + validated movability bound to one object."""

    footprint: Polygon
    primitives: list[Primitive]
    object_id: int
    movability: Movability = Movability.UNKNOWN
    hypotheses: list[AffordanceHypothesis] = field(default_factory=list)

    def has(self, kind: str) -> bool:
        return any(h.kind == kind for h in self.hypotheses)


def _plane_is_vertical(p: Primitive, perp_tol: float) -> bool:
    # angle between the normal and the ground plane
    nz = abs(float(p.normal[2]))
    return math.asin(min(nz, 1.0)) <= perp_tol


def hypothesize(p: Primitive, caps: RobotCapabilities) -> list[AffordanceHypothesis]:
    """Affordance hypotheses for one primitive, lift ranked before push."""
    out = []
    if p.shape == CYLINDER:
        if p.radius < caps.c1:
            out.append((LIFT,))
        if p.radius < caps.c2:
            out.append((PUSH,))
    elif p.shape == PLANE:
        if _plane_is_vertical(p, caps.perp_tol):
            if p.width < caps.c3:
                out.append((LIFT,))
            if p.width * p.height < caps.c4:
                out.append((PUSH,))
    elif p.shape == SPHERE:
        if p.radius < caps.c5:
            out.append((LIFT,))
        if p.radius < caps.c6:
            out.append((PUSH,))
    out.sort(key=lambda t: 0 if t[0] == LIFT else 1)
    return [AffordanceHypothesis(kind, -1, rank) for rank, (kind,) in enumerate(out)]


def bind_obstacle(footprint: Polygon, primitives: list[Primitive],
                  object_id: int, caps: RobotCapabilities) -> AffordanceObstacle:
    """Attach hypotheses to every primitive and bind them to one obstacle."""
    obs = AffordanceObstacle(footprint=footprint, primitives=list(primitives),
                             object_id=object_id)
    for i, p in enumerate(primitives):
        for h in hypothesize(p, caps):
            obs.hypotheses.append(
                AffordanceHypothesis(h.kind, i, h.rank))
    obs.hypotheses.sort(key=lambda h: (h.rank, h.primitive_id))
    return obs


PROBE_DURATION = 2.0    # s of simulated time consumed per wrench probe


def validate_lift(obs: AffordanceObstacle, world, caps: RobotCapabilities) -> bool:
    """Vertical-force probe: liftable iff weight resistance < f_L."""
    if not obs.has(LIFT):
        raise NoLiftHypothesis("obstacle has no lift hypothesis")
    obj = world.objects[obs.object_id]
    world.probe_count += 1
    world.sim_time += PROBE_DURATION
    resistance = obj.props.mass * GRAVITY
    return resistance < caps.f_L


def validate_push(obs: AffordanceObstacle, world, caps: RobotCapabilities) -> bool:
    """Gripper push probe: pushable iff static friction resistance < f_P."""
    if not obs.has(PUSH):
        raise NoPushHypothesis("obstacle has no push hypothesis")
    obj = world.objects[obs.object_id]
    world.probe_count += 1
    world.sim_time += PROBE_DURATION
    resistance = obj.props.mu_s * obj.props.mass * GRAVITY
    return resistance < caps.f_P


def assess(obs: AffordanceObstacle, world, caps: RobotCapabilities) -> Movability:
    """Validate hypotheses in rank order; first success fixes movability.

    All hypotheses of the obstacle share one validation result per kind,
    so at most one lift probe and one push probe are spent. Push is only
    probed after lift failed or was never hypothesized.
    """
    movability = Movability.UNMOVABLE
    if obs.has(LIFT) and validate_lift(obs, world, caps):
        movability = Movability.LIFTABLE
    elif obs.has(PUSH) and validate_push(obs, world, caps):
        movability = Movability.PUSHABLE
    obs.movability = movability
    world.objects[obs.object_id].movability = movability
    return movability
