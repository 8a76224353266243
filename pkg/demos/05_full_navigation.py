"""The full loop on the bundled two-obstacle corridor scenario.

A pushable crate blocks the only passage and a liftable bottle blocks
the route beyond it. The planner perceives each blockage, probes its
movability, pushes the crate via trajectory optimization, lifts the
bottle aside, and reaches the goal. Rerun with affordance handling
disabled to see the task become infeasible.
"""
import math
import sys

from namo2d.harness import emit_report, run
from namo2d.scene import load_scene
from namo2d.scenes import scene_path


def main():
    spec = load_scene(scene_path("task1.scene"))
    print(f"map {spec.bounds}, start {spec.start[:2]}, goal {spec.goal}\n")

    report = run(spec)
    for e in report.events:
        extra = " ".join(f"{k}={v}" for k, v in e.items()
                         if k not in ("t", "type"))
        print(f"t={e['t']:7.2f}  {e['type']:10s} {extra}".rstrip())

    err = math.hypot(report.final_pose.x - spec.goal[0],
                     report.final_pose.y - spec.goal[1])
    print(f"\nsuccess={report.success}  goal error {err:.3f} m")
    print(emit_report(report))

    print("\nsame scene with affordance handling disabled:")
    spec.affordance_enabled = False
    blocked = run(spec)
    print(f"success={blocked.success}  failure={blocked.failure}")
    return 0 if report.success and not blocked.success else 1


if __name__ == "__main__":
    sys.exit(main())
