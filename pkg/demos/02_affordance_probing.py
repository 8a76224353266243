"""Movability classification: rule-based hypotheses plus simulated probes.

Three objects with identical geometry rules but different masses and
friction get different validated labels. Lift is always hypothesized and
probed before push.
"""
import numpy as np

from namo2d.affordance import RobotCapabilities, assess, bind_obstacle
from namo2d.core import Pose2
from namo2d.dynamics import ObjectProps
from namo2d.perception import CYLINDER, Primitive
from namo2d.world import Shape3, World, WorldObject


def make_object(name, mass, mu_s, r=0.04):
    shape = Shape3("cylinder", r=r, h=0.35)
    props = ObjectProps(mass=mass, inertia=shape.default_inertia(mass),
                        mu_s=mu_s, mu_v=0.0, footprint=shape.footprint())
    return WorldObject(name=name, shape=shape, props=props,
                       pose=Pose2(1.0, 0.0, 0.0))


def main():
    caps = RobotCapabilities()
    print(f"capabilities: f_L = {caps.f_L} N, f_P = {caps.f_P} N")
    print(f"cylinder rules: lift if r < {caps.c1}, push if r < {caps.c2}\n")

    cases = [
        ("empty bottle", make_object("bottle", mass=0.5, mu_s=0.3)),
        ("full jug", make_object("jug", mass=3.0, mu_s=0.3)),
        ("anchored post", make_object("post", mass=8.0, mu_s=0.9)),
    ]
    for label, obj in cases:
        world = World(bounds=(0, -2, 4, 2), objects=[obj])
        prim = Primitive(CYLINDER,
                         center=np.array([obj.pose.x, obj.pose.y, 0.17]),
                         radius=obj.shape.r)
        obs = bind_obstacle(obj.world_footprint(), [prim], 0, caps)
        kinds = [h.kind for h in obs.hypotheses]
        movability = assess(obs, world, caps)
        print(f"{label:14s} m={obj.props.mass:.1f} kg "
              f"mu_s={obj.props.mu_s:.1f}  hypotheses={kinds}  "
              f"probes={world.probe_count}  -> {movability.value}")


if __name__ == "__main__":
    main()
