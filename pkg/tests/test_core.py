"""Geometry primitives: angles, vectors, polygons, hulls, distances."""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from namo2d.core import (Circle, Polygon, Pose2, Vec2, convex_hull,
                         normalize_angle, point_segment_distance,
                         project_reject, signed_distance_circle_polygon)
from namo2d.errors import DegenerateInput, NonUnitNormal


finite_angle = st.floats(min_value=-1e6, max_value=1e6,
                         allow_nan=False, allow_infinity=False)


class TestNormalizeAngle:
    def test_zero(self):
        assert normalize_angle(0.0) == 0.0

    def test_pi_maps_to_pi(self):
        assert normalize_angle(math.pi) == pytest.approx(math.pi)
        assert normalize_angle(-math.pi) == pytest.approx(math.pi)

    def test_wraps(self):
        assert normalize_angle(3 * math.pi) == pytest.approx(math.pi)
        assert normalize_angle(-0.5 + 4 * math.pi) == pytest.approx(-0.5)

    @given(finite_angle)
    def test_range(self, a):
        r = normalize_angle(a)
        assert -math.pi < r <= math.pi

    @given(finite_angle)
    def test_same_angle(self, a):
        r = normalize_angle(a)
        assert math.isclose(math.cos(r), math.cos(a), abs_tol=1e-6)
        assert math.isclose(math.sin(r), math.sin(a), abs_tol=1e-6)


class TestVec2:
    def test_ops(self):
        a, b = Vec2(1.0, 2.0), Vec2(3.0, -4.0)
        assert a.dot(b) == pytest.approx(-5.0)
        assert a.cross(b) == pytest.approx(-10.0)
        assert b.norm() == pytest.approx(5.0)
        u = b.unit()
        assert math.hypot(u.x, u.y) == pytest.approx(1.0)

    def test_rejects_nonfinite(self):
        with pytest.raises(Exception):
            Vec2(float("nan"), 0.0)


class TestPose2:
    def test_theta_normalized(self):
        p = Pose2(0.0, 0.0, 3 * math.pi)
        assert p.theta == pytest.approx(math.pi)

    def test_transform_roundtrip(self):
        p = Pose2(1.0, 2.0, 0.7)
        local = Vec2(0.3, -0.4)
        w = p.transform(local)
        # invert manually
        dx, dy = w.x - p.x, w.y - p.y
        c, s = math.cos(p.theta), math.sin(p.theta)
        back = Vec2(c * dx + s * dy, -s * dx + c * dy)
        assert back.x == pytest.approx(local.x)
        assert back.y == pytest.approx(local.y)

    def test_identity(self):
        p = Pose2(0.0, 0.0, 0.0)
        w = p.transform(Vec2(0.5, 0.25))
        assert (w.x, w.y) == (0.5, 0.25)


class TestPolygon:
    def test_ccw_enforced(self):
        cw = [(0, 0), (0, 1), (1, 1), (1, 0)]
        poly = Polygon(cw)
        assert poly.area > 0

    def test_area_centroid(self):
        sq = Polygon([(0, 0), (2, 0), (2, 2), (0, 2)])
        assert sq.area == pytest.approx(4.0)
        c = sq.centroid
        assert (c.x, c.y) == (pytest.approx(1.0), pytest.approx(1.0))

    def test_contains(self):
        sq = Polygon([(0, 0), (1, 0), (1, 1), (0, 1)])
        assert sq.contains((0.5, 0.5))
        assert not sq.contains((1.5, 0.5))

    def test_translated(self):
        sq = Polygon([(0, 0), (1, 0), (1, 1), (0, 1)])
        t = sq.translated(Vec2(2.0, 3.0))
        assert t.contains((2.5, 3.5))


def _cross2(u, v):
    return float(u[0] * v[1] - u[1] * v[0])


def _hull_oracle(points):
    """Extreme points by brute force: p is on the hull iff it is not in
    the interior of any triangle of other points (strict)."""
    pts = np.unique(np.round(points, 12), axis=0)
    n = len(pts)
    keep = []
    for i in range(n):
        p = pts[i]
        inside = False
        others = np.delete(pts, i, axis=0)
        for a in range(len(others)):
            for b in range(a + 1, len(others)):
                for c in range(b + 1, len(others)):
                    A, B, C = others[a], others[b], others[c]
                    d1 = _cross2(B - A, p - A)
                    d2 = _cross2(C - B, p - B)
                    d3 = _cross2(A - C, p - C)
                    if (d1 > 1e-12 and d2 > 1e-12 and d3 > 1e-12) or \
                       (d1 < -1e-12 and d2 < -1e-12 and d3 < -1e-12):
                        inside = True
                        break
                if inside:
                    break
            if inside:
                break
        if not inside:
            keep.append(tuple(p))
    return set(keep)


class TestConvexHull:
    def test_square_with_interior(self):
        pts = [(0, 0), (1, 0), (1, 1), (0, 1), (0.5, 0.5)]
        hull = convex_hull(pts)
        assert len(hull.vertices) == 4

    def test_collinear_raises(self):
        with pytest.raises(DegenerateInput):
            convex_hull([(0, 0), (1, 1), (2, 2)])

    def test_too_few_raises(self):
        with pytest.raises(DegenerateInput):
            convex_hull([(0, 0), (1, 1)])

    def test_oracle_equivalence(self):
        # randomized oracle sweep, counted toward the >=1000-case suite
        rng = np.random.default_rng(7)
        cases = 0
        while cases < 1000:
            n = int(rng.integers(3, 12))
            pts = rng.uniform(-5, 5, size=(n, 2))
            try:
                hull = convex_hull([tuple(p) for p in pts])
            except DegenerateInput:
                continue
            cases += 1
            got = {(round(v[0], 12), round(v[1], 12))
                   for v in np.round(hull.vertices, 12)}
            want = {(round(p[0], 12), round(p[1], 12))
                    for p in _hull_oracle(pts)}
            assert got == want, f"case {cases}: {got} != {want}"

    def test_hull_contains_all_points(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            pts = rng.uniform(-3, 3, size=(int(rng.integers(3, 30)), 2))
            try:
                hull = convex_hull([tuple(p) for p in pts])
            except DegenerateInput:
                continue
            c = hull.centroid
            shrunk = np.array([c.x, c.y])
            for p in pts:
                # every point within tiny tolerance of the hull
                q = p + 1e-9 * (shrunk - p)
                assert hull.contains((q[0], q[1]))


class TestDistances:
    def test_point_segment(self):
        d, q, t = point_segment_distance((0.0, 1.0), (-1.0, 0.0), (1.0, 0.0))
        assert d == pytest.approx(1.0)
        assert q == pytest.approx([0.0, 0.0])
        assert t == pytest.approx(0.5)
        d, q, t = point_segment_distance((3.0, 4.0), (0.0, 0.0), (1.0, 0.0))
        assert d == pytest.approx(math.hypot(2.0, 4.0))
        assert t == pytest.approx(1.0)

    def test_circle_polygon_outside(self):
        sq = Polygon([(1, -1), (3, -1), (3, 1), (1, 1)])
        c = Circle(Vec2(0.0, 0.0), 0.75)
        d, n, _ = signed_distance_circle_polygon(c, sq)
        assert d == pytest.approx(0.25)
        assert (n.x, n.y) == (pytest.approx(-1.0), pytest.approx(0.0))

    def test_circle_polygon_inside_negative(self):
        sq = Polygon([(-1, -1), (1, -1), (1, 1), (-1, 1)])
        c = Circle(Vec2(0.0, 0.0), 0.25)
        d, _, _ = signed_distance_circle_polygon(c, sq)
        assert d < 0

    def test_project_reject(self):
        d_p, d_r = project_reject(Vec2(3.0, 4.0), Vec2(1.0, 0.0))
        assert d_p == pytest.approx(3.0)
        assert d_r == pytest.approx(4.0)

    def test_project_reject_abs(self):
        d_p, d_r = project_reject(Vec2(-3.0, -4.0), Vec2(1.0, 0.0))
        assert d_p == pytest.approx(3.0)
        assert d_r == pytest.approx(4.0)

    def test_nonunit_normal_raises(self):
        with pytest.raises(NonUnitNormal):
            project_reject(Vec2(1.0, 0.0), Vec2(2.0, 0.0))

    @given(st.floats(-10, 10), st.floats(-10, 10), finite_angle)
    @settings(max_examples=100)
    def test_pythagoras(self, x, y, ang):
        n = Vec2(math.cos(ang), math.sin(ang))
        d_p, d_r = project_reject(Vec2(x, y), n)
        assert d_p * d_p + d_r * d_r == pytest.approx(x * x + y * y, abs=1e-6)
