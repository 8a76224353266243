"""SVG rendering of world snapshots: gray statics, red movables, green goal."""
from __future__ import annotations

import math
import os

from .core import Pose2

_MOVABLE_COLORS = {
    "unknown": "#c0392b",
    "liftable": "#e67e22",
    "pushable": "#c0392b",
    "unmovable": "#7f8c8d",
}


def _poly_points(vertices):
    return " ".join(f"{x:.4f},{y:.4f}" for x, y in vertices)


def render_svg(snap, statics, bounds, goal, robot_radius, shapes,
               path=None, scale=80.0) -> str:
    """One SVG frame of a world snapshot.

    `shapes` maps object name -> body-frame footprint Polygon. The y axis
    is flipped so +y points up in the image.
    """
    xmin, ymin, xmax, ymax = bounds
    w = (xmax - xmin) * scale
    h = (ymax - ymin) * scale
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0f}" '
        f'height="{h:.0f}" viewBox="{xmin} {ymin} {xmax - xmin} {ymax - ymin}">',
        f'<g transform="translate(0,{ymin + ymax}) scale(1,-1)">',
        f'<rect x="{xmin}" y="{ymin}" width="{xmax - xmin}" '
        f'height="{ymax - ymin}" fill="#fdfdfd"/>',
    ]
    for poly in statics:
        parts.append(f'<polygon points="{_poly_points(poly.vertices)}" '
                     'fill="#9e9e9e" stroke="#616161" stroke-width="0.01"/>')
    if path is not None:
        pts = " ".join(f"{p.x:.4f},{p.y:.4f}" for p in path)
        parts.append(f'<polyline points="{pts}" fill="none" stroke="#3498db" '
                     'stroke-width="0.02" stroke-dasharray="0.08,0.05"/>')
    for name, pose, movability in snap["objects"]:
        fp = shapes[name].transformed(pose)
        color = _MOVABLE_COLORS.get(movability, "#c0392b")
        parts.append(f'<polygon points="{_poly_points(fp.vertices)}" '
                     f'fill="{color}" fill-opacity="0.85" stroke="#641e16" '
                     'stroke-width="0.01"/>')
    parts.append(f'<circle cx="{goal.x:.4f}" cy="{goal.y:.4f}" r="0.1" '
                 'fill="#27ae60"/>')
    r: Pose2 = snap["robot"]
    parts.append(f'<circle cx="{r.x:.4f}" cy="{r.y:.4f}" r="{robot_radius}" '
                 'fill="#2c3e50" fill-opacity="0.9"/>')
    hx = r.x + robot_radius * math.cos(r.theta)
    hy = r.y + robot_radius * math.sin(r.theta)
    parts.append(f'<line x1="{r.x:.4f}" y1="{r.y:.4f}" x2="{hx:.4f}" '
                 f'y2="{hy:.4f}" stroke="#ecf0f1" stroke-width="0.03"/>')
    parts.append("</g></svg>")
    return "\n".join(parts)


def emit_svg(history, out_dir, stride, statics, bounds, goal, robot_radius,
             shapes, path=None) -> list:
    """Write every stride-th snapshot as frame_XXXX.svg; returns the paths."""
    if not history:
        raise ValueError("history is empty")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    os.makedirs(out_dir, exist_ok=True)
    files = []
    for i in range(0, len(history), stride):
        svg = render_svg(history[i], statics, bounds, goal, robot_radius,
                         shapes, path)
        fname = os.path.join(out_dir, f"frame_{i:04d}.svg")
        try:
            with open(fname, "w") as f:
                f.write(svg)
        except OSError as e:
            raise IOError(f"cannot write {fname}: {e}") from e
        files.append(fname)
    return files
