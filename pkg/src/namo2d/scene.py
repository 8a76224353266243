"""Scene files: a line-oriented key/value format with [section] headers.

Sections: [map], [robot], [object NAME] (repeatable), [capabilities],
[cito], [run]. Values are whitespace-separated numbers or words; '#'
starts a comment. Distances are meters, angles radians, masses kg.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict

from .affordance import RobotCapabilities
from .cito import CitoWeights
from .core import Polygon, Pose2, Vec2
from .dynamics import ObjectProps, VscmParams
from .errors import ParseError, ValidationError
from .navigation import OccupancyGrid, grid_from_bounds
from .world import Shape3, World, WorldObject


@dataclass
class SceneObject:
    name: str
    shape: tuple                       # ("box", w, d, h) etc.
    pose: tuple                        # (x, y, theta)
    mass: float
    mu_s: float = 0.3
    mu_v: float = 1.0
    inertia: float = 0.0               # 0 -> shape default


@dataclass
class SceneSpec:
    bounds: tuple                      # (xmin, ymin, xmax, ymax)
    resolution: float = 0.05
    statics: list = field(default_factory=list)    # list of vertex tuples
    start: tuple = (0.0, 0.0, 0.0)
    goal: tuple = (1.0, 1.0)
    robot_radius: float = 0.25
    v_max: float = 2.0
    w_max: float = 2.0
    objects: list = field(default_factory=list)
    capabilities: dict = field(default_factory=dict)
    cito_N: int = 20
    cito_dt: float = 0.5
    corridor: tuple = None
    alpha: float = 25.0
    k_max: float = 30.0
    weights: tuple = (2.5e3, 1.0e-4, 7.0)
    seed: int = 0
    sensing_radius: float = 2.5
    density: float = 2500.0
    noise_sigma: float = 0.0
    affordance_enabled: bool = True
    max_replans: int = 10

    def robot_capabilities(self) -> RobotCapabilities:
        return RobotCapabilities(**self.capabilities)

    def cito_weights(self) -> CitoWeights:
        return CitoWeights(*self.weights)

    def vscm(self) -> VscmParams:
        return VscmParams(self.alpha, self.k_max)


def _shape3(desc: tuple) -> Shape3:
    kind = desc[0]
    if kind == "box":
        return Shape3("box", w=desc[1], d=desc[2], h=desc[3])
    if kind == "cylinder":
        return Shape3("cylinder", r=desc[1], h=desc[2])
    if kind == "sphere":
        return Shape3("sphere", r=desc[1])
    raise ValidationError("shape", f"unknown shape kind {kind!r}")


def build_world(spec: SceneSpec) -> World:
    statics = [Polygon(v) for v in spec.statics]
    objects = []
    for so in spec.objects:
        shape = _shape3(so.shape)
        inertia = so.inertia if so.inertia > 0 else shape.default_inertia(so.mass)
        props = ObjectProps(so.mass, inertia, so.mu_s, so.mu_v,
                            shape.footprint())
        objects.append(WorldObject(so.name, shape, props,
                                   Pose2(*so.pose)))
    return World(bounds=spec.bounds, static_polygons=statics, objects=objects,
                 robot_pose=Pose2(*spec.start), robot_radius=spec.robot_radius)


def build_static_grid(spec: SceneSpec) -> OccupancyGrid:
    grid = grid_from_bounds(spec.bounds, spec.resolution)
    for v in spec.statics:
        grid.rasterize_polygon(Polygon(v))
    return grid


def validate(spec: SceneSpec) -> None:
    xmin, ymin, xmax, ymax = spec.bounds
    if xmax <= xmin or ymax <= ymin:
        raise ValidationError("bounds", "empty extent")
    if spec.cito_N * spec.cito_dt > 60.0:
        raise ValidationError("cito", "N*dt exceeds 60 s")
    statics = [Polygon(v) for v in spec.statics]

    def inside_static(x, y):
        return any(p.contains((x, y)) for p in statics)

    sx, sy = spec.start[0], spec.start[1]
    gx, gy = spec.goal
    if not (xmin <= sx <= xmax and ymin <= sy <= ymax) or inside_static(sx, sy):
        raise ValidationError("start", "start pose is not free")
    if not (xmin <= gx <= xmax and ymin <= gy <= ymax) or inside_static(gx, gy):
        raise ValidationError("goal", "goal is not free")
    for so in spec.objects:
        x, y = so.pose[0], so.pose[1]
        if not (xmin <= x <= xmax and ymin <= y <= ymax):
            raise ValidationError(f"object {so.name}", "pose outside map")
        if so.mass <= 0:
            raise ValidationError(f"object {so.name}", "mass must be positive")
    spec.robot_capabilities()          # raises on bad values
    if spec.corridor is not None and len(spec.corridor) != 4:
        raise ValidationError("corridor", "expected 4 numbers")


# ---------------------------------------------------------------------------
# parsing

def _parse_value(tokens):
    if len(tokens) == 1:
        t = tokens[0]
        if t in ("true", "false"):
            return t == "true"
        try:
            return int(t)
        except ValueError:
            pass
        try:
            return float(t)
        except ValueError:
            return t
    return tuple(_parse_value([t]) for t in tokens)


def load_scene(path) -> SceneSpec:
    """Parse and validate a scene file."""
    sections: list[tuple[str, dict, list]] = []
    current = None
    with open(path) as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("["):
                if not line.endswith("]"):
                    raise ParseError("unterminated section header", lineno)
                current = (line[1:-1].strip(), {}, [])
                sections.append(current)
                continue
            if "=" not in line:
                raise ParseError(f"expected 'key = value', got {line!r}", lineno)
            if current is None:
                raise ParseError("key/value before any [section]", lineno)
            key, val = line.split("=", 1)
            key = key.strip()
            tokens = val.split()
            if not tokens:
                raise ParseError(f"empty value for {key!r}", lineno)
            try:
                parsed = _parse_value(tokens)
            except ValueError:
                raise ParseError(f"bad value for {key!r}", lineno) from None
            if key in ("static",):
                current[2].append((key, parsed))
            else:
                current[1][key] = parsed

    spec = SceneSpec(bounds=(0.0, 0.0, 1.0, 1.0))
    have_map = False
    for name, kv, multi in sections:
        if name == "map":
            have_map = True
            spec.bounds = _floats(kv.get("bounds"), 4, "map.bounds")
            spec.resolution = float(kv.get("resolution", spec.resolution))
            for key, parsed in multi:
                flat = _flatten(parsed)
                if len(flat) < 6 or len(flat) % 2:
                    raise ValidationError("map.static",
                                          "need >= 3 x,y vertex pairs")
                spec.statics.append(tuple(zip(flat[0::2], flat[1::2])))
        elif name == "robot":
            spec.start = _floats(kv.get("start"), 3, "robot.start")
            spec.goal = _floats(kv.get("goal"), 2, "robot.goal")
            spec.robot_radius = float(kv.get("radius", spec.robot_radius))
            spec.v_max = float(kv.get("v_max", spec.v_max))
            spec.w_max = float(kv.get("w_max", spec.w_max))
        elif name.startswith("object"):
            obj_name = name.split(None, 1)[1] if " " in name else \
                f"object{len(spec.objects)}"
            shape = kv.get("shape")
            if shape is None:
                raise ValidationError(f"object {obj_name}", "missing shape")
            shape = shape if isinstance(shape, tuple) else (shape,)
            spec.objects.append(SceneObject(
                name=obj_name,
                shape=(str(shape[0]),) + tuple(float(v) for v in shape[1:]),
                pose=_floats(kv.get("pose"), 3, f"object {obj_name}.pose"),
                mass=float(kv.get("mass", 0.0)),
                mu_s=float(kv.get("mu_s", 0.3)),
                mu_v=float(kv.get("mu_v", 1.0)),
                inertia=float(kv.get("inertia", 0.0))))
        elif name == "capabilities":
            spec.capabilities = {k: float(v) for k, v in kv.items()}
        elif name == "cito":
            spec.cito_N = int(kv.get("N", spec.cito_N))
            spec.cito_dt = float(kv.get("dt", spec.cito_dt))
            if "corridor" in kv:
                spec.corridor = _floats(kv["corridor"], 4, "cito.corridor")
            spec.alpha = float(kv.get("alpha", spec.alpha))
            spec.k_max = float(kv.get("k_max", spec.k_max))
            spec.weights = (float(kv.get("w1", spec.weights[0])),
                            float(kv.get("w2", spec.weights[1])),
                            float(kv.get("w3", spec.weights[2])))
        elif name == "run":
            spec.seed = int(kv.get("seed", spec.seed))
            spec.sensing_radius = float(kv.get("sensing_radius",
                                               spec.sensing_radius))
            spec.density = float(kv.get("density", spec.density))
            spec.noise_sigma = float(kv.get("noise_sigma", spec.noise_sigma))
            spec.affordance_enabled = bool(kv.get("affordance",
                                                  spec.affordance_enabled))
            spec.max_replans = int(kv.get("max_replans", spec.max_replans))
        else:
            raise ParseError(f"unknown section [{name}]")
    if not have_map:
        raise ValidationError("map", "missing [map] section")
    validate(spec)
    return spec


def _flatten(v):
    if isinstance(v, tuple):
        return [float(x) for x in v]
    return [float(v)]


def _floats(v, n, field_name):
    if v is None:
        raise ValidationError(field_name, "missing")
    flat = _flatten(v)
    if len(flat) != n:
        raise ValidationError(field_name, f"expected {n} numbers, got {len(flat)}")
    return tuple(flat)


def save_scene(spec: SceneSpec, path) -> None:
    """Write a scene file that load_scene parses back to an equal spec."""
    def fmt(x):
        if isinstance(x, bool):
            return "true" if x else "false"
        if isinstance(x, float):
            return repr(x)
        return str(x)

    def row(vals):
        return " ".join(fmt(float(v)) for v in vals)

    lines = ["# namo2d scene (units: m, rad, kg, s)", "[map]",
             f"bounds = {row(spec.bounds)}",
             f"resolution = {fmt(spec.resolution)}"]
    for poly in spec.statics:
        flat = [c for v in poly for c in v]
        lines.append(f"static = {row(flat)}")
    lines += ["", "[robot]",
              f"start = {row(spec.start)}",
              f"goal = {row(spec.goal)}",
              f"radius = {fmt(spec.robot_radius)}",
              f"v_max = {fmt(spec.v_max)}",
              f"w_max = {fmt(spec.w_max)}"]
    for so in spec.objects:
        lines += ["", f"[object {so.name}]",
                  "shape = " + so.shape[0] + " " + row(so.shape[1:]),
                  f"pose = {row(so.pose)}",
                  f"mass = {fmt(so.mass)}",
                  f"mu_s = {fmt(so.mu_s)}",
                  f"mu_v = {fmt(so.mu_v)}",
                  f"inertia = {fmt(so.inertia)}"]
    if spec.capabilities:
        lines += ["", "[capabilities]"]
        lines += [f"{k} = {fmt(v)}" for k, v in spec.capabilities.items()]
    lines += ["", "[cito]",
              f"N = {spec.cito_N}", f"dt = {fmt(spec.cito_dt)}"]
    if spec.corridor is not None:
        lines.append(f"corridor = {row(spec.corridor)}")
    lines += [f"alpha = {fmt(spec.alpha)}", f"k_max = {fmt(spec.k_max)}",
              f"w1 = {fmt(spec.weights[0])}", f"w2 = {fmt(spec.weights[1])}",
              f"w3 = {fmt(spec.weights[2])}",
              "", "[run]",
              f"seed = {spec.seed}",
              f"sensing_radius = {fmt(spec.sensing_radius)}",
              f"density = {fmt(spec.density)}",
              f"noise_sigma = {fmt(spec.noise_sigma)}",
              f"affordance = {fmt(spec.affordance_enabled)}",
              f"max_replans = {spec.max_replans}"]
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")
