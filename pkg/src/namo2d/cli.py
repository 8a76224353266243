"""Command line interface: plan / run / cito on a scene file."""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import cito as ct
from . import navigation as nav
from . import render
from .core import Pose2, Vec2
from .errors import Namo2dError, NoPath, ParseError, ValidationError
from .harness import emit_report, nav_config_from_scene, run
from .scene import build_static_grid, build_world, load_scene


def _add_common(p):
    p.add_argument("--scene", required=True, help="scene file path")
    p.add_argument("--seed", type=int, default=None, help="override run seed")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--svg", action="store_true", help="emit SVG frames")
    p.add_argument("--svg-stride", type=int, default=5)
    p.add_argument("--max-replans", type=int, default=None)
    p.add_argument("--report", choices=("text", "records"), default="text")


def build_parser():
    ap = argparse.ArgumentParser(prog="namo2d",
                                 description="planar NAMO scenario runner")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_ in (("plan", "global A* path only"),
                        ("run", "full interactive navigation"),
                        ("cito", "standalone pushing optimization")):
        _add_common(sub.add_parser(name, help=help_))
    return ap


def _load(args):
    spec = load_scene(args.scene)
    if args.seed is not None:
        spec.seed = args.seed
    if args.max_replans is not None:
        spec.max_replans = args.max_replans
    return spec


def _shapes(world):
    return {o.name: o.props.footprint for o in world.objects}


def cmd_plan(args) -> int:
    spec = _load(args)
    grid = build_static_grid(spec)
    config = nav_config_from_scene(spec)
    inflated = nav.inflate(grid, config.inflation_radius)
    try:
        path = nav.astar(inflated, Vec2(spec.start[0], spec.start[1]),
                         Vec2(*spec.goal))
    except NoPath as e:
        print(f"no path: {e}", file=sys.stderr)
        return 1
    print(f"path: {len(path.cells)} cells, cost {path.cost:.3f} m")
    for w in path.waypoints:
        print(f"  {w.x:.3f} {w.y:.3f}")
    if args.svg:
        world = build_world(spec)
        snap = nav.snapshot(world)
        render.emit_svg([snap], args.out, 1, world.static_polygons,
                        spec.bounds, Vec2(*spec.goal), spec.robot_radius,
                        _shapes(world), path=path.waypoints)
    return 0


def cmd_run(args) -> int:
    spec = _load(args)
    report = run(spec)
    for e in report.events:
        extra = " ".join(f"{k}={v}" for k, v in e.items()
                         if k not in ("t", "type"))
        print(f"EVENT t={e['t']:.2f} type={e['type']} {extra}".rstrip())
    print(emit_report(report, args.report))
    if not report.success:
        print(f"failure: {report.failure}", file=sys.stderr)
    if args.svg and report.history:
        world = build_world(spec)
        render.emit_svg(report.history, args.out, args.svg_stride,
                        world.static_polygons, spec.bounds, Vec2(*spec.goal),
                        spec.robot_radius, _shapes(world))
    return 0 if report.success else 1


def cmd_cito(args) -> int:
    spec = _load(args)
    world = build_world(spec)
    if not world.objects:
        print("scene has no movable object for cito", file=sys.stderr)
        return 2
    config = nav_config_from_scene(spec)
    obj = world.objects[0]
    from .affordance import AffordanceObstacle, Movability
    obs = AffordanceObstacle(footprint=obj.world_footprint(), primitives=[],
                             object_id=0, movability=Movability.PUSHABLE)
    model, problem = nav.build_push_problem(world, obs, Vec2(*spec.goal),
                                            config.push)
    sol = ct.scvx_solve(problem, config=config.push.scvx)
    for rec in sol.trace:
        print(f"iter={rec['iteration']} cost={rec['cost']:.4f} "
              f"ratio={rec['ratio']:.3f} radius={rec['radius']:.4f} "
              f"max_k={rec['max_k']:.3f} accepted={rec['accepted']}")
    final = sol.X[-1]
    err = float(np.hypot(final[0] - spec.goal[0], final[1] - spec.goal[1]))
    print(f"converged={sol.converged} iterations={sol.iterations} "
          f"cost={sol.cost:.4f} goal_error={err:.4f} "
          f"max_terminal_k={sol.max_terminal_stiffness:.4f}")
    if args.svg:
        snaps = []
        for xi in sol.X:
            world.robot_pose = Pose2.from_array(xi[0:3])
            obj.pose = Pose2.from_array(xi[model.q_slice(0)])
            snaps.append(nav.snapshot(world))
        render.emit_svg(snaps, args.out, args.svg_stride,
                        world.static_polygons, spec.bounds, Vec2(*spec.goal),
                        spec.robot_radius, _shapes(world))
    return 0 if sol.converged else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return {"plan": cmd_plan, "run": cmd_run, "cito": cmd_cito}[args.command](args)
    except (ParseError, ValidationError, FileNotFoundError) as e:
        print(f"input error: {e}", file=sys.stderr)
        return 2
    except Namo2dError as e:
        print(f"planner error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
