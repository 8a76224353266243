"""Scenario execution: run a scene end to end and report phase timings."""
from __future__ import annotations

import time
from dataclasses import dataclass, field

from . import navigation as nav
from .core import Pose2, Vec2
from .errors import Namo2dError
from .scene import SceneSpec, build_static_grid, build_world

PHASES = ("affordance", "cito", "execution", "total")


@dataclass
class RunReport:
    events: list = field(default_factory=list)
    times: dict = field(default_factory=dict)      # phase -> seconds
    final_pose: Pose2 = None
    success: bool = False
    failure: str = ""
    history: list = field(default_factory=list)
    path_cost: float = 0.0

    def event_types(self):
        return [e["type"] for e in self.events]


def nav_config_from_scene(spec: SceneSpec) -> nav.NavConfig:
    push = nav.PushSetup(N=spec.cito_N, dt=spec.cito_dt,
                         corridor=spec.corridor,
                         weights=spec.cito_weights(),
                         vscm=spec.vscm(),
                         v_base=spec.v_max, w_base=spec.w_max)
    return nav.NavConfig(resolution=spec.resolution,
                         robot_radius=spec.robot_radius,
                         sensing_radius=spec.sensing_radius,
                         density=spec.density,
                         noise_sigma=spec.noise_sigma,
                         seed=spec.seed,
                         max_replans=spec.max_replans,
                         affordance_enabled=spec.affordance_enabled,
                         caps=spec.robot_capabilities(),
                         push=push)


def run(spec: SceneSpec, seed=None) -> RunReport:
    """Execute the full planner on a scene; deterministic for fixed seed."""
    world = build_world(spec)
    grid = build_static_grid(spec)
    config = nav_config_from_scene(spec)
    if seed is not None:
        config.seed = seed
    timers: dict = {}
    report = RunReport()
    t0 = time.perf_counter()
    try:
        nr = nav.namo_planner(grid, Pose2(*spec.start), Vec2(*spec.goal),
                              world, config, timers=timers)
        report.events = nr.events
        report.success = nr.success
        report.failure = nr.failure
        report.final_pose = nr.final_pose
        report.history = nr.history
        report.path_cost = nr.path_cost
    except Namo2dError as e:
        report.success = False
        report.failure = f"{type(e).__name__}: {e}"
        report.final_pose = world.robot_pose
    report.times = {p: timers.get(p, 0.0) for p in ("affordance", "cito",
                                                    "execution")}
    report.times["total"] = time.perf_counter() - t0
    return report


def _cells(report: RunReport):
    return [f"{report.times[p]:.3f}" for p in PHASES]


def emit_report(reports, fmt: str = "text") -> str:
    """Phase-timing table; one row per run, text or record layout."""
    if isinstance(reports, RunReport):
        reports = [reports]
    if fmt == "records":
        lines = []
        for i, r in enumerate(reports, start=1):
            vals = _cells(r)
            fields = " ".join(f"{p}={v}" for p, v in zip(PHASES, vals))
            lines.append(f"run={i} {fields} success={str(r.success).lower()}")
        return "\n".join(lines)
    if fmt != "text":
        raise ValueError(f"unknown report format {fmt!r}")
    header = ["Run", "Affordance", "CITO", "Execution", "Total"]
    rows = [[str(i)] + _cells(r) for i, r in enumerate(reports, start=1)]
    widths = [max(len(h), *(len(r[c]) for r in rows)) if rows else len(h)
              for c, h in enumerate(header)]
    def line(cells):
        return " | ".join(c.rjust(w) for c, w in zip(cells, widths))
    out = [line(header), "-+-".join("-" * w for w in widths)]
    out += [line(r) for r in rows]
    return "\n".join(out)
