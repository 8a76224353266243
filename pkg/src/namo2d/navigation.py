"""Grid mapping, A* planning, and the interactive replanning loop.

The planner walks an A* path on the inflated global map, watches an
ego-centered local map for unregistered obstacles, and on blockage runs
the perception -> affordance -> clear/avoid pipeline: liftable obstacles
are relocated off the path, pushable ones are cleared by contact-implicit
trajectory optimization, and unmovable ones are added to the global map
before replanning.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage
from shapely.geometry import LineString
from shapely.geometry import Polygon as ShPolygon
from shapely.geometry import box as sh_box

from . import affordance as aff
from . import cito as ct
from . import perception as pc
from .core import Polygon, Pose2, Vec2, project_reject
from .dynamics import DynamicsModel, ObjectProps, VscmParams
from .errors import (CitoNotConverged, ExecutionDiverged, NoPath,
                     NoPlacementFound, OutOfBounds, StepLimitExceeded)

FREE = False
OCCUPIED = True


@dataclass
class OccupancyGrid:
    resolution: float
    origin: Vec2                        # world position of cell (0, 0) corner
    width: int                          # cells along x
    height: int                         # cells along y
    cells: np.ndarray = None            # bool (width, height)

    def __post_init__(self):
        if self.resolution <= 0:
            raise ValueError("resolution must be positive")
        if self.cells is None:
            self.cells = np.zeros((self.width, self.height), dtype=bool)

    def copy(self) -> "OccupancyGrid":
        return OccupancyGrid(self.resolution, self.origin, self.width,
                             self.height, self.cells.copy())

    def world_to_cell(self, x: float, y: float):
        ix = int(math.floor((x - self.origin.x) / self.resolution))
        iy = int(math.floor((y - self.origin.y) / self.resolution))
        return ix, iy

    def cell_center(self, ix: int, iy: int) -> Vec2:
        return Vec2(self.origin.x + (ix + 0.5) * self.resolution,
                    self.origin.y + (iy + 0.5) * self.resolution)

    def in_bounds(self, ix: int, iy: int) -> bool:
        return 0 <= ix < self.width and 0 <= iy < self.height

    def occupied_at(self, x: float, y: float) -> bool:
        ix, iy = self.world_to_cell(x, y)
        if not self.in_bounds(ix, iy):
            return True
        return bool(self.cells[ix, iy])

    def rasterize_polygon(self, poly: Polygon) -> None:
        """Mark every cell overlapping the polygon (conservative)."""
        shp = ShPolygon(poly.vertices)
        minx, miny, maxx, maxy = shp.bounds
        ix0, iy0 = self.world_to_cell(minx, miny)
        ix1, iy1 = self.world_to_cell(maxx, maxy)
        for ix in range(max(ix0, 0), min(ix1 + 1, self.width)):
            for iy in range(max(iy0, 0), min(iy1 + 1, self.height)):
                if self.cells[ix, iy]:
                    continue
                x0 = self.origin.x + ix * self.resolution
                y0 = self.origin.y + iy * self.resolution
                cell = sh_box(x0, y0, x0 + self.resolution, y0 + self.resolution)
                if shp.intersects(cell):
                    self.cells[ix, iy] = True


def grid_from_bounds(bounds, resolution: float) -> OccupancyGrid:
    xmin, ymin, xmax, ymax = bounds
    w = int(math.ceil((xmax - xmin) / resolution))
    h = int(math.ceil((ymax - ymin) / resolution))
    return OccupancyGrid(resolution, Vec2(xmin, ymin), w, h)


def inflate(grid: OccupancyGrid, radius: float) -> OccupancyGrid:
    """Grow the occupied set by a Euclidean radius (cell-center metric)."""
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    out = grid.copy()
    if radius == 0 or not grid.cells.any():
        return out
    r_cells = int(math.floor(radius / grid.resolution))
    d = np.arange(-r_cells, r_cells + 1)
    DX, DY = np.meshgrid(d, d, indexing="ij")
    struct = (np.hypot(DX, DY) * grid.resolution) <= radius + 1e-12
    out.cells = ndimage.binary_dilation(grid.cells, structure=struct)
    return out


@dataclass
class GridPath:
    cells: list                         # [(ix, iy), ...]
    waypoints: list                     # [Vec2, ...] cell centers
    cost: float                         # metric path length on the grid

    def __len__(self):
        return len(self.cells)


_MOVES = [(1, 0, 1.0), (-1, 0, 1.0), (0, 1, 1.0), (0, -1, 1.0),
          (1, 1, math.sqrt(2)), (1, -1, math.sqrt(2)),
          (-1, 1, math.sqrt(2)), (-1, -1, math.sqrt(2))]


def astar(grid: OccupancyGrid, start: Vec2, goal: Vec2) -> GridPath:
    """Cost-optimal 8-connected path under the octile metric.

    Ties on f are broken by lower flat cell index, which makes the
    returned path deterministic.
    """
    s = grid.world_to_cell(start.x, start.y)
    g = grid.world_to_cell(goal.x, goal.y)
    for name, c in (("start", s), ("goal", g)):
        if not grid.in_bounds(*c):
            raise OutOfBounds(f"{name} cell {c} outside grid")
        if grid.cells[c]:
            raise NoPath(f"{name} cell {c} is occupied")
    res = grid.resolution
    H = grid.height

    def heuristic(c):
        dx, dy = abs(c[0] - g[0]), abs(c[1] - g[1])
        return res * (max(dx, dy) + (math.sqrt(2) - 1.0) * min(dx, dy))

    dist = {s: 0.0}
    parent = {}
    heap = [(heuristic(s), s[0] * H + s[1], s)]
    closed = set()
    while heap:
        f, _, c = heapq.heappop(heap)
        if c in closed:
            continue
        if c == g:
            cells = [c]
            while c in parent:
                c = parent[c]
                cells.append(c)
            cells.reverse()
            return GridPath(cells, [grid.cell_center(*cc) for cc in cells],
                            dist[g])
        closed.add(c)
        for dx, dy, w in _MOVES:
            nb = (c[0] + dx, c[1] + dy)
            if not grid.in_bounds(*nb) or grid.cells[nb]:
                continue
            nd = dist[c] + w * res
            if nd < dist.get(nb, math.inf) - 1e-12:
                dist[nb] = nd
                parent[nb] = c
                heapq.heappush(heap, (nd + heuristic(nb), nb[0] * H + nb[1], nb))
    raise NoPath("goal unreachable")


def get_local_map(world, static_grid: OccupancyGrid, robot: Pose2,
                  sensing_radius: float) -> OccupancyGrid:
    """Static map plus footprints of unregistered objects within range."""
    if sensing_radius <= 0:
        raise ValueError("sensing_radius must be positive")
    local = static_grid.copy()
    for obj in world.objects:
        if obj.known:
            continue
        d = math.hypot(obj.pose.x - robot.x, obj.pose.y - robot.y)
        if d <= sensing_radius:
            local.rasterize_polygon(obj.world_footprint())
    return local


def check_collision(local: OccupancyGrid, path: GridPath, robot_radius: float,
                    start_index: int = 0, inflated: bool = False):
    """First blocked path coordinate from the current progress, or None."""
    grid = local if inflated else inflate(local, robot_radius)
    for i in range(start_index, len(path.cells)):
        if grid.cells[path.cells[i]]:
            return path.waypoints[i], i
    return None


def filter_primitive(Psi: list, o: Vec2, r: float):
    """Identify the primitive blocking the path point o.

    The validation vector runs from the primitive center to o. Planes use
    projection/rejection distances against the (ground-plane) normal;
    cylinders and spheres compare the vector norm against the inflated
    radius. First match in order wins; None if nothing matches.
    """
    if r <= 0:
        raise ValueError("inflation radius must be positive")
    for psi in Psi:
        cx, cy = psi.center2d
        v = Vec2(o.x - cx, o.y - cy)
        if psi.shape == pc.PLANE:
            n2 = psi.normal2d
            nn = math.hypot(n2[0], n2[1])
            if nn < 1e-9:
                continue                # horizontal plane cannot block
            d_p, d_r = project_reject(v, Vec2(n2[0] / nn, n2[1] / nn))
            if d_p < r and d_r < psi.width / 2.0 + r:
                return psi
        else:
            if v.norm() < psi.radius + r:
                return psi
    return None


# ---------------------------------------------------------------------------
# obstacle clearing

def clear_obstacle_lift(obs: aff.AffordanceObstacle, world, path: GridPath,
                        static_grid: OccupancyGrid, robot_radius: float,
                        margin: float = 0.05, search_radius: float = 3.0):
    """Relocate a liftable object to the nearest spot clear of the path."""
    if obs.movability is not aff.Movability.LIFTABLE:
        raise ValueError("object is not liftable")
    obj = world.objects[obs.object_id]
    line = LineString([(w.x, w.y) for w in path.waypoints]) \
        if len(path.waypoints) > 1 else None
    inflated = inflate(static_grid, robot_radius + margin)
    res = static_grid.resolution
    cx, cy = obj.pose.x, obj.pose.y
    steps = int(search_radius / res)
    candidates = []
    for ix in range(-steps, steps + 1):
        for iy in range(-steps, steps + 1):
            d = math.hypot(ix, iy) * res
            if 0 < d <= search_radius:
                candidates.append((d, ix, iy))
    candidates.sort()
    clearance = robot_radius + margin
    for _, ix, iy in candidates:
        pose = Pose2(cx + ix * res, cy + iy * res, obj.pose.theta)
        fp = obj.props.footprint.transformed(pose)
        shp = ShPolygon(fp.vertices)
        if line is not None and shp.distance(line) <= clearance:
            continue
        if any(inflated.occupied_at(v[0], v[1]) for v in fp.vertices) \
                or inflated.occupied_at(pose.x, pose.y):
            continue
        obj.pose = pose
        obj.vel = np.zeros(3)
        obj.known = True
        return pose
    raise NoPlacementFound("no free placement within search radius")


@dataclass
class PushSetup:
    """Parameters for one pushing optimization."""

    N: int = 20
    dt: float = 0.5
    corridor: tuple = None
    weights: ct.CitoWeights = field(default_factory=ct.CitoWeights)
    vscm: VscmParams = field(default_factory=VscmParams)
    v_base: float = 2.0
    w_base: float = 2.0
    goal_tolerance: float = 0.2
    scvx: ct.ScvxConfig = field(default_factory=ct.ScvxConfig)


def build_push_problem(world, obs: aff.AffordanceObstacle, goal: Vec2,
                       setup: PushSetup):
    """Dynamics model + CITO problem for pushing one obstacle.

    The optimized model contains just the blocking object, described by
    its perceived footprint re-centered on the COM.
    """
    obj = world.objects[obs.object_id]
    # perceived footprint, re-expressed in the object body frame
    c, s = math.cos(obj.pose.theta), math.sin(obj.pose.theta)
    Rinv = np.array([[c, s], [-s, c]])
    body = Polygon((obs.footprint.vertices
                    - np.array([obj.pose.x, obj.pose.y])) @ Rinv.T)
    props = ObjectProps(obj.props.mass, obj.props.inertia, obj.props.mu_s,
                        obj.props.mu_v, _simplify(body))
    model = DynamicsModel(world.robot_radius, [props], vscm=setup.vscm)
    corridor = setup.corridor or world.bounds
    u_lo, u_hi, x_lo, x_hi = ct.default_bounds(
        model, corridor, setup.v_base, setup.w_base)
    x0 = model.pack_state(world.robot_pose.as_array(), world.robot_vel,
                          [obj.pose.as_array()], [obj.vel])
    problem = ct.CitoProblem(model=model, N=setup.N, dt=setup.dt, x0=x0,
                             goal=np.array([goal.x, goal.y]),
                             u_lo=u_lo, u_hi=u_hi, x_lo=x_lo, x_hi=x_hi,
                             weights=setup.weights)
    return model, problem


def _simplify(poly: Polygon, tol: float = 0.01) -> Polygon:
    """Drop near-collinear hull vertices so contact pairs stay few."""
    shp = ShPolygon(poly.vertices).simplify(tol)
    v = np.asarray(shp.exterior.coords)[:-1]
    if len(v) < 3:
        return poly
    return Polygon(v)


def clear_obstacle_push(obs: aff.AffordanceObstacle, world, path: GridPath,
                        goal_waypoint: Vec2, setup: PushSetup,
                        static_grid: OccupancyGrid, progress_index: int,
                        history=None):
    """Plan and execute a pushing motion past the blockage.

    Runs the contact-implicit optimization, then executes the controls
    open loop with all virtual stiffnesses zeroed (physical penalty
    contact only). Succeeds iff the remaining path is clear afterwards
    and the base reached the push goal.
    """
    if obs.movability is not aff.Movability.PUSHABLE:
        raise ValueError("object is not pushable")
    model, problem = build_push_problem(world, obs, goal_waypoint, setup)
    sol = ct.scvx_solve(problem, config=setup.scvx)
    if not sol.converged:
        raise CitoNotConverged(
            f"SCVX stopped after {sol.iterations} iterations, cost {sol.cost:.3g}")
    # execution: no virtual forces, penalty contact does the pushing
    U_exec = sol.U.copy()
    U_exec[:, 3:] = 0.0
    X = model.rollout(problem.x0, U_exec, problem.dt)
    obj = world.objects[obs.object_id]
    for xi in X[1:]:
        world.robot_pose = Pose2.from_array(xi[0:3])
        obj.pose = Pose2.from_array(xi[model.q_slice(0)])
        obj.vel = xi[model.v_slice(0)].copy()
        if history is not None:
            history.append(snapshot(world))
    world.sim_time += problem.N * problem.dt
    obj.known = True
    final = X[-1]
    err = math.hypot(final[0] - goal_waypoint.x, final[1] - goal_waypoint.y)
    local = static_grid.copy()
    local.rasterize_polygon(obj.world_footprint())
    hit = check_collision(local, path, world.robot_radius, progress_index)
    if err > setup.goal_tolerance or hit is not None:
        raise ExecutionDiverged(
            f"push left goal error {err:.3f} m, path blocked: {hit is not None}")
    return sol


def snapshot(world):
    """Immutable pose record of the world for rendering."""
    return {
        "robot": world.robot_pose,
        "objects": [(o.name, o.pose, o.movability.value) for o in world.objects],
    }


# ---------------------------------------------------------------------------
# planner loop

@dataclass
class NavConfig:
    resolution: float = 0.05
    robot_radius: float = 0.25
    inflation_margin: float = 0.05
    sensing_radius: float = 2.5
    fov: float = math.radians(120.0)
    sensor_range: float = 3.5
    density: float = 2500.0             # points / m^2
    noise_sigma: float = 0.0
    seed: int = 0
    max_replans: int = 10
    step_limit: int = 5000
    affordance_enabled: bool = True
    caps: aff.RobotCapabilities = field(default_factory=aff.RobotCapabilities)
    perception: pc.PerceptionConfig = field(default_factory=pc.PerceptionConfig)
    push: PushSetup = field(default_factory=PushSetup)
    base_speed: float = 0.8             # m/s while tracking the path

    @property
    def inflation_radius(self) -> float:
        return self.robot_radius + self.inflation_margin


@dataclass
class NavReport:
    events: list = field(default_factory=list)
    success: bool = False
    final_pose: Pose2 = None
    failure: str = ""
    path_cost: float = 0.0
    history: list = field(default_factory=list)

    def add(self, world, kind: str, **data):
        self.events.append({"t": round(world.sim_time, 6), "type": kind, **data})

    def event_types(self):
        return [e["type"] for e in self.events]


def _timed(timers, key):
    class _T:
        def __enter__(self):
            import time
            self.t0 = time.perf_counter()
            return self

        def __exit__(self, *a):
            import time
            if timers is not None:
                timers[key] = timers.get(key, 0.0) + time.perf_counter() - self.t0
    return _T()


def namo_planner(global_grid: OccupancyGrid, start: Pose2, goal: Vec2,
                 world, config: NavConfig, timers=None) -> NavReport:
    """Interactive path execution with affordance-based obstacle handling.

    Plans on the inflated global map, walks the path waypoint by
    waypoint, and on each detected blockage runs perception, affordance
    assessment, and the matching clearing action; unmovable obstacles are
    rasterized into the global map and the path is replanned. Replanning
    is an iterative loop (tail recursion of the decision procedure).
    """
    report = NavReport()
    world.robot_pose = start
    report.history.append(snapshot(world))
    replans = 0
    r_infl = config.inflation_radius

    def plan(from_pose):
        inflated = inflate(global_grid, r_infl)
        return astar(inflated, Vec2(from_pose.x, from_pose.y), goal)

    try:
        path = plan(start)
    except NoPath:
        report.failure = "NoPath"
        report.final_pose = world.robot_pose
        return report

    progress = 0
    steps = 0
    goal_cell = global_grid.world_to_cell(goal.x, goal.y)
    while True:
        steps += 1
        if steps > config.step_limit:
            raise StepLimitExceeded(f"planner exceeded {config.step_limit} steps")
        # advance one waypoint
        if progress < len(path.cells) - 1:
            progress += 1
            wp = path.waypoints[progress]
            prev = world.robot_pose
            heading = math.atan2(wp.y - prev.y, wp.x - prev.x)
            with _timed(timers, "execution"):
                world.robot_pose = Pose2(wp.x, wp.y, heading)
                world.sim_time += math.hypot(wp.x - prev.x, wp.y - prev.y) \
                    / config.base_speed
            report.history.append(snapshot(world))
        if global_grid.world_to_cell(world.robot_pose.x, world.robot_pose.y) \
                == goal_cell:
            report.add(world, "Goal")
            report.success = True
            report.final_pose = world.robot_pose
            report.path_cost = path.cost
            return report

        local = get_local_map(world, global_grid, world.robot_pose,
                              config.sensing_radius)
        hit = check_collision(local, path, r_infl, progress)
        if hit is None:
            continue
        o, o_index = hit
        report.add(world, "Block", x=round(o.x, 4), y=round(o.y, 4))

        with _timed(timers, "affordance"):
            face = math.atan2(o.y - world.robot_pose.y, o.x - world.robot_pose.x)
            sense_pose = Pose2(world.robot_pose.x, world.robot_pose.y, face)
            cloud = pc.synthesize_cloud(world, sense_pose, config.fov,
                                        config.sensor_range, config.density,
                                        config.noise_sigma,
                                        config.seed + steps)
            clusters = pc.cluster_cloud(cloud, config.perception.dist_threshold,
                                        config.perception.ground_z)
            Psi = []
            owner = {}
            for ci, cl in enumerate(clusters):
                if config.perception.voxel_leaf > 0:
                    cl.points = pc.voxel_downsample(cl.points,
                                                    config.perception.voxel_leaf)
                try:
                    prims = pc.extract_primitives(cl, config.perception,
                                                  seed=config.seed + 7 * ci)
                except pc.EmptyCluster:
                    continue
                for p in prims:
                    owner[id(p)] = ci
                Psi.extend(prims)
            psi = filter_primitive(Psi, o, r_infl) if Psi else None
            if psi is not None:
                cl = clusters[owner[id(psi)]]
            elif clusters:
                # fall back to the cluster whose centroid is nearest o
                cl = min(clusters, key=lambda c: np.linalg.norm(
                    c.points[:, :2].mean(axis=0) - np.array([o.x, o.y])))
            else:
                cl = None
            if cl is None:
                # nothing perceivable: treat the blocked cell as static
                blocked = _cell_polygon(global_grid, *global_grid.world_to_cell(
                    o.x, o.y))
                global_grid.rasterize_polygon(blocked)
                report.add(world, "AddStatic", reason="unperceived")
                path, progress, replans = _replan(plan, world, report, replans,
                                                  config)
                continue
            obj_idx = _bind_world_object(world, cl)
            obs = aff.bind_obstacle(cl.footprint(), cl.primitives, obj_idx,
                                    config.caps)
            if config.affordance_enabled:
                movability = aff.assess(obs, world, config.caps)
                if obs.has(aff.LIFT):
                    report.add(world, "ProbeLift",
                               ok=movability is aff.Movability.LIFTABLE)
                if obs.has(aff.PUSH) and \
                        movability is not aff.Movability.LIFTABLE:
                    report.add(world, "ProbePush",
                               ok=movability is aff.Movability.PUSHABLE)
            else:
                movability = aff.Movability.UNMOVABLE
                obs.movability = movability

        if movability is aff.Movability.LIFTABLE:
            with _timed(timers, "execution"):
                clear_obstacle_lift(obs, world, path, global_grid,
                                    config.robot_radius,
                                    config.inflation_margin)
            report.add(world, "Lift", object=world.objects[obs.object_id].name)
            report.history.append(snapshot(world))
            continue
        if movability is aff.Movability.PUSHABLE:
            push_goal = _push_goal(path, o_index, config.robot_radius,
                                   inflate(local, r_infl),
                                   config.push.corridor)
            try:
                with _timed(timers, "cito"):
                    model, problem = build_push_problem(world, obs, push_goal,
                                                        config.push)
                    sol = ct.scvx_solve(problem, config=config.push.scvx)
                if not sol.converged:
                    raise CitoNotConverged(f"{sol.iterations} iterations")
                with _timed(timers, "execution"):
                    _execute_push(world, obs, model, problem, sol, report)
                obj = world.objects[obs.object_id]
                # judge the push on the pushed object alone; other unknown
                # obstacles get their own Block events later
                local2 = global_grid.copy()
                local2.rasterize_polygon(obj.world_footprint())
                progress = _nearest_waypoint(path, world.robot_pose, progress)
                hit2 = check_collision(local2, path, r_infl, progress)
                err = math.hypot(world.robot_pose.x - push_goal.x,
                                 world.robot_pose.y - push_goal.y)
                if err > config.push.goal_tolerance or hit2 is not None:
                    raise ExecutionDiverged(
                        f"goal error {err:.3f} m, still blocked: "
                        f"{hit2 is not None}")
                report.add(world, "Push",
                           object=world.objects[obs.object_id].name)
                continue
            except (CitoNotConverged, ExecutionDiverged) as e:
                report.add(world, "PushFailed", reason=type(e).__name__)
                movability = aff.Movability.UNMOVABLE
                obs.movability = movability
                world.objects[obs.object_id].movability = movability

        # unmovable: register on the global map and replan
        delta = world.objects[obs.object_id].world_footprint()
        global_grid.rasterize_polygon(delta)
        world.objects[obs.object_id].known = True
        report.add(world, "AddStatic",
                   object=world.objects[obs.object_id].name)
        try:
            path, progress, replans = _replan(plan, world, report, replans,
                                              config)
        except NoPath:
            report.failure = "NoPath"
            report.final_pose = world.robot_pose
            return report


def _replan(plan, world, report, replans, config):
    replans += 1
    if replans > config.max_replans:
        raise NoPath("replan budget exhausted")
    path = plan(world.robot_pose)
    report.add(world, "Replan", count=replans)
    return path, 0, replans


def _cell_polygon(grid, ix, iy):
    x0 = grid.origin.x + ix * grid.resolution
    y0 = grid.origin.y + iy * grid.resolution
    r = grid.resolution
    return Polygon([(x0, y0), (x0 + r, y0), (x0 + r, y0 + r), (x0, y0 + r)])


def _bind_world_object(world, cluster) -> int:
    """Match a perceived cluster to the unknown world object it came from."""
    c = cluster.points[:, :2].mean(axis=0)
    best, best_d = None, math.inf
    for i, obj in enumerate(world.objects):
        if obj.known:
            continue
        d = math.hypot(obj.pose.x - c[0], obj.pose.y - c[1])
        if d < best_d:
            best, best_d = i, d
    if best is None:
        raise RuntimeError("no unknown object matches the perceived cluster")
    return best


def _push_goal(path: GridPath, o_index: int, robot_radius: float,
               inflated_grid: OccupancyGrid = None,
               corridor: tuple = None) -> Vec2:
    """First waypoint at least three base radii past the blockage.

    The offset is measured from the far end of the contiguous blocked
    stretch, so the base finishes clear of the object it just pushed.
    Waypoints outside the optimization corridor are skipped; they would
    make the push goal unreachable under the state bounds.
    """
    end = o_index
    if inflated_grid is not None:
        for i in range(o_index, len(path.cells)):
            if inflated_grid.cells[path.cells[i]]:
                end = i
            else:
                break
    o = path.waypoints[end]
    need = 3.0 * robot_radius

    def in_corridor(w):
        if corridor is None:
            return True
        xmin, ymin, xmax, ymax = corridor
        pad = 0.05
        return xmin + pad <= w.x <= xmax - pad and \
            ymin + pad <= w.y <= ymax - pad

    fallback = None
    for i in range(end, len(path.waypoints)):
        w = path.waypoints[i]
        if not in_corridor(w):
            continue
        if math.hypot(w.x - o.x, w.y - o.y) >= need:
            return w
        fallback = w
    return fallback if fallback is not None else path.waypoints[-1]


def _nearest_waypoint(path: GridPath, pose: Pose2, from_index: int) -> int:
    best, best_d = from_index, math.inf
    for i in range(from_index, len(path.waypoints)):
        w = path.waypoints[i]
        d = math.hypot(w.x - pose.x, w.y - pose.y)
        if d < best_d:
            best, best_d = i, d
    return best


def _execute_push(world, obs, model, problem, sol, report):
    """Open-loop execution of the optimized controls with k = 0."""
    U_exec = sol.U.copy()
    U_exec[:, 3:] = 0.0
    X = model.rollout(problem.x0, U_exec, problem.dt)
    obj = world.objects[obs.object_id]
    for xi in X[1:]:
        world.robot_pose = Pose2.from_array(xi[0:3])
        obj.pose = Pose2.from_array(xi[model.q_slice(0)])
        obj.vel = xi[model.v_slice(0)].copy()
        report.history.append(snapshot(world))
    world.sim_time += problem.N * problem.dt
    obj.known = True
    report.add(world, "Cito", iterations=sol.iterations,
               cost=round(sol.cost, 6))
