"""Planar geometry foundation: poses, polygons, signed distances, projections.

Everything here is a pure function of its inputs; angles are radians,
lengths meters.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInput, NonUnitNormal

_TWO_PI = 2.0 * math.pi


def normalize_angle(theta: float) -> float:
    """Wrap an angle to (-pi, pi]; -pi maps to +pi."""
    t = math.remainder(theta, _TWO_PI)
    if t <= -math.pi:
        t += _TWO_PI
    return t


@dataclass(frozen=True)
class Vec2:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError("Vec2 components must be finite")

    def __add__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x - other.x, self.y - other.y)

    def __mul__(self, s: float) -> "Vec2":
        return Vec2(self.x * s, self.y * s)

    __rmul__ = __mul__

    def dot(self, other: "Vec2") -> float:
        return self.x * other.x + self.y * other.y

    def cross(self, other: "Vec2") -> float:
        return self.x * other.y - self.y * other.x

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def unit(self) -> "Vec2":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize zero vector")
        return Vec2(self.x / n, self.y / n)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y])

    @staticmethod
    def from_array(a) -> "Vec2":
        return Vec2(float(a[0]), float(a[1]))


@dataclass(frozen=True)
class Pose2:
    """SE(2) configuration; theta is normalized to (-pi, pi] on construction."""

    x: float
    y: float
    theta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "theta", normalize_angle(self.theta))

    @property
    def position(self) -> Vec2:
        return Vec2(self.x, self.y)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.theta])

    @staticmethod
    def from_array(a) -> "Pose2":
        return Pose2(float(a[0]), float(a[1]), float(a[2]))

    def transform(self, p: Vec2) -> Vec2:
        """Map a body-frame point into the world frame."""
        c, s = math.cos(self.theta), math.sin(self.theta)
        return Vec2(self.x + c * p.x - s * p.y, self.y + s * p.x + c * p.y)


class Polygon:
    """Simple polygon with counter-clockwise vertex order.

    Vertices are stored as an (n, 2) float array. Construction enforces
    >= 3 vertices and nonzero area, and flips clockwise input to CCW.
    """

    def __init__(self, vertices):
        v = np.asarray(vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 3:
            raise DegenerateInput("polygon needs >= 3 planar vertices")
        if not np.all(np.isfinite(v)):
            raise DegenerateInput("polygon vertices must be finite")
        area2 = _signed_area2(v)
        if abs(area2) < 1e-12:
            raise DegenerateInput("polygon has zero area")
        if area2 < 0:
            v = v[::-1].copy()
        self.vertices = v

    def __len__(self):
        return len(self.vertices)

    @property
    def area(self) -> float:
        return 0.5 * _signed_area2(self.vertices)

    @property
    def centroid(self) -> Vec2:
        v = self.vertices
        w = np.roll(v, -1, axis=0)
        cross = v[:, 0] * w[:, 1] - v[:, 1] * w[:, 0]
        a = cross.sum() / 2.0
        cx = ((v[:, 0] + w[:, 0]) * cross).sum() / (6.0 * a)
        cy = ((v[:, 1] + w[:, 1]) * cross).sum() / (6.0 * a)
        return Vec2(cx, cy)

    def edges(self):
        """Yield (start, end, outward unit normal) per edge as arrays."""
        v = self.vertices
        w = np.roll(v, -1, axis=0)
        t = w - v
        # CCW order: outward normal is the tangent rotated -90 degrees.
        n = np.stack([t[:, 1], -t[:, 0]], axis=1)
        n /= np.linalg.norm(n, axis=1, keepdims=True)
        return v, w, n

    def contains(self, p) -> bool:
        """Point-in-polygon by crossing number; boundary counts as inside."""
        x, y = float(p[0]), float(p[1])
        v = self.vertices
        w = np.roll(v, -1, axis=0)
        inside = False
        for (x0, y0), (x1, y1) in zip(v, w):
            # on-edge check
            dx, dy = x1 - x0, y1 - y0
            cross = dx * (y - y0) - dy * (x - x0)
            if abs(cross) < 1e-12 and min(x0, x1) - 1e-12 <= x <= max(x0, x1) + 1e-12 \
                    and min(y0, y1) - 1e-12 <= y <= max(y0, y1) + 1e-12:
                return True
            if (y0 > y) != (y1 > y):
                xi = x0 + (y - y0) * dx / dy
                if x < xi:
                    inside = not inside
        return inside

    def translated(self, d: Vec2) -> "Polygon":
        return Polygon(self.vertices + np.array([d.x, d.y]))

    def transformed(self, pose: Pose2) -> "Polygon":
        c, s = math.cos(pose.theta), math.sin(pose.theta)
        r = np.array([[c, -s], [s, c]])
        return Polygon(self.vertices @ r.T + np.array([pose.x, pose.y]))

    def __repr__(self):
        return f"Polygon({self.vertices.tolist()})"


@dataclass(frozen=True)
class Circle:
    center: Vec2
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("circle radius must be positive")


def _signed_area2(v: np.ndarray) -> float:
    w = np.roll(v, -1, axis=0)
    return float((v[:, 0] * w[:, 1] - v[:, 1] * w[:, 0]).sum())


def convex_hull(points) -> Polygon:
    """Convex hull of 2D points (Andrew's monotone chain), CCW output.

    Raises DegenerateInput for fewer than 3 points or collinear input.
    """
    pts = [(p.x, p.y) if isinstance(p, Vec2) else (float(p[0]), float(p[1]))
           for p in points]
    pts = sorted(set(pts))
    if len(pts) < 3:
        raise DegenerateInput("convex hull needs >= 3 distinct points")

    def half(seq):
        out = []
        for p in seq:
            while len(out) >= 2 and _cross3(out[-2], out[-1], p) <= 0:
                out.pop()
            out.append(p)
        return out

    lower = half(pts)
    upper = half(reversed(pts))
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 3:
        raise DegenerateInput("points are collinear")
    return Polygon(np.array(hull))


def _cross3(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def point_segment_distance(p, a, b):
    """Distance from point to segment plus the nearest point on it."""
    p = np.asarray(p, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    ab = b - a
    denom = float(ab @ ab)
    t = 0.0 if denom == 0.0 else float(np.clip((p - a) @ ab / denom, 0.0, 1.0))
    q = a + t * ab
    return float(np.linalg.norm(p - q)), q, t


def signed_distance_circle_polygon(c: Circle, poly: Polygon):
    """Signed distance between a circle and a polygon boundary.

    Returns (distance, normal, witness) where distance is the center's
    distance to the boundary (negative when the center is inside) minus
    the radius; normal is the outward unit normal of the nearest edge,
    or the vertex-to-center direction when the nearest feature is a
    vertex; witness is the nearest boundary point.
    """
    center = c.center.as_array()
    v, w, en = poly.edges()
    best_d = math.inf
    best_q = None
    best_n = None
    for i in range(len(v)):
        d, q, t = point_segment_distance(center, v[i], w[i])
        if d < best_d:
            best_d = d
            best_q = q
            if 0.0 < t < 1.0 or d < 1e-12:
                best_n = en[i]
            else:
                # vertex region: radial direction keeps the field continuous
                diff = center - q
                nrm = np.linalg.norm(diff)
                best_n = diff / nrm if nrm > 1e-12 else en[i]
    inside = poly.contains(center)
    dist = (-best_d if inside else best_d) - c.radius
    if inside:
        # normal still points out of the polygon toward escape
        best_n = np.asarray(best_n, dtype=float)
    return dist, Vec2.from_array(best_n), Vec2.from_array(best_q)


def project_reject(v: Vec2, n: Vec2):
    """Projection and rejection magnitudes of v against a unit direction n."""
    nn = n.norm()
    if abs(nn - 1.0) > 1e-9:
        raise NonUnitNormal(f"|n| = {nn}")
    d = v.dot(n)
    d_p = abs(d)
    rx, ry = v.x - d * n.x, v.y - d * n.y
    d_r = math.hypot(rx, ry)
    return d_p, d_r
