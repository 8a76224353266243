"""namo2d: planar navigation among movable obstacles.

Perception (RANSAC primitives), affordance assessment, contact-implicit
trajectory optimization (SCVX with smooth virtual contact forces), and an
interactive replanning loop, all on a self-contained 2D simulator.
"""
from .core import Circle, Polygon, Pose2, Vec2, convex_hull, \
    project_reject, signed_distance_circle_polygon
from .affordance import (AffordanceObstacle, Movability, RobotCapabilities,
                         assess, hypothesize, validate_lift, validate_push)
from .dynamics import (ContactPair, DynamicsModel, ObjectProps, VscmParams,
                       generalized_virtual_wrench, virtual_force_magnitude)
from .cito import (CitoProblem, CitoSolution, CitoWeights, ScvxConfig,
                   cost_final, cost_integrated, linearize, scvx_solve,
                   total_cost)
from .navigation import (GridPath, NavConfig, OccupancyGrid, astar,
                         check_collision, filter_primitive, get_local_map,
                         inflate, namo_planner)
from .perception import (Cluster, PerceptionConfig, PointCloud, Primitive,
                         cluster_cloud, extract_primitives, footprint,
                         ransac_fit, synthesize_cloud)
from .scene import SceneSpec, load_scene, save_scene
from .harness import RunReport, emit_report, run
from .world import Shape3, World, WorldObject

__version__ = "0.1.0"
