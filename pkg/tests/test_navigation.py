"""Tests for grids, A*, the primitive filter, and obstacle clearing."""
import heapq
import math

import numpy as np
import pytest
from shapely.geometry import LineString, Point
from shapely.geometry import Polygon as ShPolygon

from namo2d.affordance import Movability, RobotCapabilities, bind_obstacle
from namo2d.core import Polygon, Pose2, Vec2
from namo2d.dynamics import ObjectProps
from namo2d.errors import NoPath, NoPlacementFound, OutOfBounds
from namo2d.navigation import (GridPath, NavConfig, OccupancyGrid, _push_goal,
                               astar, check_collision, clear_obstacle_lift,
                               filter_primitive, get_local_map,
                               grid_from_bounds, inflate, namo_planner)
from namo2d.perception import CYLINDER, PLANE, SPHERE, Primitive
from namo2d.world import Shape3, World, WorldObject

_MOVES = [(1, 0, 1.0), (-1, 0, 1.0), (0, 1, 1.0), (0, -1, 1.0),
          (1, 1, math.sqrt(2)), (1, -1, math.sqrt(2)),
          (-1, 1, math.sqrt(2)), (-1, -1, math.sqrt(2))]


def _dijkstra_cost(cells, s, g, res):
    """Reference shortest-path cost on the 8-connected grid, or None."""
    w, h = cells.shape
    dist = {s: 0.0}
    heap = [(0.0, s)]
    done = set()
    while heap:
        d, c = heapq.heappop(heap)
        if c in done:
            continue
        if c == g:
            return d
        done.add(c)
        for dx, dy, step in _MOVES:
            nb = (c[0] + dx, c[1] + dy)
            if not (0 <= nb[0] < w and 0 <= nb[1] < h) or cells[nb]:
                continue
            nd = d + step * res
            if nd < dist.get(nb, math.inf) - 1e-12:
                dist[nb] = nd
                heapq.heappush(heap, (nd, nb))
    return None


class TestOccupancyGrid:
    def test_cell_round_trip(self):
        g = grid_from_bounds((1.0, 2.0, 5.0, 4.0), 0.1)
        assert (g.width, g.height) == (40, 20)
        ix, iy = g.world_to_cell(1.55, 2.35)
        c = g.cell_center(ix, iy)
        assert g.world_to_cell(c.x, c.y) == (ix, iy)

    def test_out_of_bounds_is_occupied(self):
        g = grid_from_bounds((0, 0, 1, 1), 0.1)
        assert g.occupied_at(-0.5, 0.5)
        assert not g.occupied_at(0.5, 0.5)

    def test_rasterize_marks_overlap(self):
        g = grid_from_bounds((0, 0, 2, 2), 0.1)
        g.rasterize_polygon(Polygon([(0.5, 0.5), (1.0, 0.5),
                                     (1.0, 1.0), (0.5, 1.0)]))
        assert g.occupied_at(0.75, 0.75)
        assert g.occupied_at(0.55, 0.55)
        assert not g.occupied_at(1.5, 1.5)

    def test_invalid_resolution(self):
        with pytest.raises(ValueError):
            OccupancyGrid(0.0, Vec2(0, 0), 10, 10)


class TestInflate:
    def test_matches_disc_oracle(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            w, h = int(rng.integers(3, 12)), int(rng.integers(3, 12))
            g = OccupancyGrid(0.1, Vec2(0, 0), w, h)
            g.cells = rng.random((w, h)) < 0.2
            radius = float(rng.uniform(0.0, 0.35))
            out = inflate(g, radius)
            occ = np.argwhere(g.cells)
            for ix in range(w):
                for iy in range(h):
                    near = any(math.hypot(ix - ox, iy - oy) * 0.1
                               <= radius + 1e-12 for ox, oy in occ)
                    assert out.cells[ix, iy] == near

    def test_zero_radius_identity(self):
        g = OccupancyGrid(0.1, Vec2(0, 0), 5, 5)
        g.cells[2, 2] = True
        out = inflate(g, 0.0)
        assert np.array_equal(out.cells, g.cells)

    def test_negative_radius_rejected(self):
        with pytest.raises(ValueError):
            inflate(OccupancyGrid(0.1, Vec2(0, 0), 5, 5), -0.1)


class TestAstar:
    def test_matches_dijkstra_oracle(self):
        rng = np.random.default_rng(9)
        checked = 0
        while checked < 1000:
            w, h = int(rng.integers(4, 16)), int(rng.integers(4, 16))
            g = OccupancyGrid(0.25, Vec2(0, 0), w, h)
            g.cells = rng.random((w, h)) < 0.25
            s = (int(rng.integers(0, w)), int(rng.integers(0, h)))
            t = (int(rng.integers(0, w)), int(rng.integers(0, h)))
            if g.cells[s] or g.cells[t]:
                continue
            checked += 1
            ref = _dijkstra_cost(g.cells, s, t, 0.25)
            start = g.cell_center(*s)
            goal = g.cell_center(*t)
            if ref is None:
                with pytest.raises(NoPath):
                    astar(g, start, goal)
                continue
            path = astar(g, start, goal)
            assert path.cost == pytest.approx(ref, abs=1e-9)
            # the returned path itself is traversable and sums to the cost
            total = 0.0
            for a, b in zip(path.cells, path.cells[1:]):
                assert not g.cells[b]
                assert max(abs(a[0] - b[0]), abs(a[1] - b[1])) == 1
                total += math.hypot(a[0] - b[0], a[1] - b[1]) * 0.25
            assert total == pytest.approx(path.cost)

    def test_deterministic(self):
        g = OccupancyGrid(0.25, Vec2(0, 0), 12, 12)
        p1 = astar(g, g.cell_center(0, 0), g.cell_center(11, 7))
        p2 = astar(g, g.cell_center(0, 0), g.cell_center(11, 7))
        assert p1.cells == p2.cells

    def test_bad_endpoints(self):
        g = OccupancyGrid(0.25, Vec2(0, 0), 8, 8)
        g.cells[3, 3] = True
        with pytest.raises(OutOfBounds):
            astar(g, Vec2(-1.0, 0.1), g.cell_center(5, 5))
        with pytest.raises(NoPath):
            astar(g, g.cell_center(3, 3), g.cell_center(5, 5))


def _rect_region(psi, r):
    """Blocking region of a plane primitive as a shapely rectangle."""
    cx, cy = psi.center2d
    n = psi.normal2d
    t = np.array([-n[1], n[0]])
    half_n, half_t = r, psi.width / 2.0 + r
    c = np.array([cx, cy])
    corners = [c + sn * half_n * n + st * half_t * t
               for sn in (-1, 1) for st in (-1, 1)]
    corners[2], corners[3] = corners[3], corners[2]
    return ShPolygon(corners)


class TestFilterPrimitive:
    def test_matches_geometric_oracle(self):
        rng = np.random.default_rng(21)
        for _ in range(1000):
            shape = [PLANE, CYLINDER, SPHERE][int(rng.integers(0, 3))]
            c = rng.uniform(-2.0, 2.0, 2)
            if shape == PLANE:
                th = rng.uniform(0, 2 * math.pi)
                psi = Primitive(PLANE, center=np.array([c[0], c[1], 0.4]),
                                width=float(rng.uniform(0.1, 0.8)),
                                height=0.5,
                                normal=np.array([math.cos(th),
                                                 math.sin(th), 0.0]))
            else:
                psi = Primitive(shape, center=np.array([c[0], c[1], 0.2]),
                                radius=float(rng.uniform(0.05, 0.6)))
            o = Vec2(*rng.uniform(-2.5, 2.5, 2))
            r = float(rng.uniform(0.1, 0.5))
            got = filter_primitive([psi], o, r)
            if shape == PLANE:
                expect = _rect_region(psi, r).contains(Point(o.x, o.y))
            else:
                expect = Point(o.x, o.y).distance(Point(*c)) < psi.radius + r
            assert (got is psi) == expect

    def test_first_match_wins(self):
        a = Primitive(CYLINDER, center=np.zeros(3), radius=0.3)
        b = Primitive(SPHERE, center=np.zeros(3), radius=0.3)
        assert filter_primitive([a, b], Vec2(0.1, 0.0), 0.2) is a
        assert filter_primitive([b, a], Vec2(0.1, 0.0), 0.2) is b

    def test_horizontal_plane_skipped(self):
        psi = Primitive(PLANE, center=np.zeros(3), width=0.5, height=0.5,
                        normal=np.array([0.0, 0.0, 1.0]))
        assert filter_primitive([psi], Vec2(0.0, 0.0), 0.3) is None

    def test_no_match_returns_none(self):
        psi = Primitive(CYLINDER, center=np.zeros(3), radius=0.1)
        assert filter_primitive([psi], Vec2(3.0, 0.0), 0.2) is None

    def test_invalid_radius(self):
        with pytest.raises(ValueError):
            filter_primitive([], Vec2(0, 0), 0.0)


def _straight_path(grid, y, x0, x1):
    cells = []
    iy = grid.world_to_cell(0.0, y)[1]
    for ix in range(grid.world_to_cell(x0, y)[0],
                    grid.world_to_cell(x1, y)[0] + 1):
        cells.append((ix, iy))
    wps = [grid.cell_center(*c) for c in cells]
    return GridPath(cells, wps, (len(cells) - 1) * grid.resolution)


class TestCheckCollision:
    def test_finds_first_block_after_progress(self):
        g = grid_from_bounds((0, 0, 4, 2), 0.1)
        path = _straight_path(g, 1.0, 0.2, 3.8)
        g.rasterize_polygon(Polygon([(1.5, 0.9), (1.7, 0.9),
                                     (1.7, 1.1), (1.5, 1.1)]))
        hit = check_collision(g, path, 0.25)
        assert hit is not None
        wp, idx = hit
        assert wp.x < 1.5                   # inflation reaches ahead
        later = g.world_to_cell(2.5, 1.0)[0] - g.world_to_cell(0.2, 1.0)[0]
        assert check_collision(g, path, 0.25, start_index=later) is None

    def test_clear_path(self):
        g = grid_from_bounds((0, 0, 4, 2), 0.1)
        path = _straight_path(g, 1.0, 0.2, 3.8)
        assert check_collision(g, path, 0.25) is None


def _lift_world(obj_xy=(2.0, 1.0)):
    shape = Shape3("cylinder", r=0.04, h=0.3)
    props = ObjectProps(1.0, shape.default_inertia(1.0), 0.3, 0.0,
                        shape.footprint())
    obj = WorldObject("b", shape, props, Pose2(obj_xy[0], obj_xy[1], 0.0))
    world = World(bounds=(0, 0, 4, 2), objects=[obj])
    return world, obj


class TestLiftClearing:
    def test_relocates_off_path(self):
        world, obj = _lift_world()
        grid = grid_from_bounds(world.bounds, 0.05)
        path = _straight_path(grid, 1.0, 0.2, 3.8)
        obs = bind_obstacle(obj.world_footprint(), [], 0,
                            RobotCapabilities())
        obs.movability = Movability.LIFTABLE
        pose = clear_obstacle_lift(obs, world, path, grid, 0.25, margin=0.05)
        assert obj.known
        line = LineString([(w.x, w.y) for w in path.waypoints])
        fp = ShPolygon(obj.world_footprint().vertices)
        assert fp.distance(line) > 0.25 + 0.05
        assert pose is obj.pose

    def test_requires_liftable(self):
        world, obj = _lift_world()
        grid = grid_from_bounds(world.bounds, 0.05)
        path = _straight_path(grid, 1.0, 0.2, 3.8)
        obs = bind_obstacle(obj.world_footprint(), [], 0,
                            RobotCapabilities())
        obs.movability = Movability.PUSHABLE
        with pytest.raises(ValueError):
            clear_obstacle_lift(obs, world, path, grid, 0.25)

    def test_no_placement_in_solid_map(self):
        world, obj = _lift_world()
        grid = grid_from_bounds(world.bounds, 0.05)
        grid.cells[:] = True
        path = _straight_path(grid, 1.0, 0.2, 3.8)
        obs = bind_obstacle(obj.world_footprint(), [], 0,
                            RobotCapabilities())
        obs.movability = Movability.LIFTABLE
        with pytest.raises(NoPlacementFound):
            clear_obstacle_lift(obs, world, path, grid, 0.25)


class TestPushGoal:
    def _path(self):
        g = grid_from_bounds((0, 0, 6, 2), 0.2)
        return g, _straight_path(g, 1.0, 0.1, 5.9)

    def test_offset_past_blocked_stretch(self):
        g, path = self._path()
        blocked = g.copy()
        i0 = 8
        for i in range(i0, i0 + 4):
            blocked.cells[path.cells[i]] = True
        goal = _push_goal(path, i0, 0.25, blocked)
        far_end = path.waypoints[i0 + 3]
        assert math.hypot(goal.x - far_end.x, goal.y - far_end.y) \
            >= 3 * 0.25 - 1e-9

    def test_corridor_filter(self):
        g, path = self._path()
        corridor = (0.0, 0.0, 3.0, 2.0)
        goal = _push_goal(path, 5, 0.25, None, corridor)
        assert goal.x <= 3.0 - 0.05

    def test_fallback_to_last_waypoint(self):
        g, path = self._path()
        goal = _push_goal(path, len(path.cells) - 1, 0.25)
        assert goal is path.waypoints[-1]


class TestPlannerLoop:
    def test_empty_map_goal(self):
        world = World(bounds=(0, 0, 4, 4))
        grid = grid_from_bounds(world.bounds, 0.05)
        cfg = NavConfig()
        rep = namo_planner(grid, Pose2(0.5, 0.5, 0.0), Vec2(3.5, 3.5),
                           world, cfg)
        assert rep.success
        assert rep.event_types() == ["Goal"]
        assert rep.path_cost > 0

    def test_walled_goal_no_path(self):
        world = World(bounds=(0, 0, 4, 4))
        grid = grid_from_bounds(world.bounds, 0.05)
        grid.rasterize_polygon(Polygon([(2.0, 0.0), (2.2, 0.0),
                                        (2.2, 4.0), (2.0, 4.0)]))
        rep = namo_planner(grid, Pose2(0.5, 0.5, 0.0), Vec2(3.5, 3.5),
                           world, NavConfig())
        assert not rep.success
        assert rep.failure == "NoPath"

    def test_local_map_sees_nearby_unknown(self):
        world, obj = _lift_world(obj_xy=(1.0, 1.0))
        grid = grid_from_bounds(world.bounds, 0.05)
        local = get_local_map(world, grid, Pose2(0.5, 1.0, 0.0), 2.5)
        assert local.occupied_at(1.0, 1.0)
        far = get_local_map(world, grid, Pose2(0.5, 1.0, 0.0), 0.2)
        assert not far.occupied_at(1.0, 1.0)
        with pytest.raises(ValueError):
            get_local_map(world, grid, Pose2(0, 0, 0), 0.0)
