"""Synthetic depth sensing and primitive extraction.

Point clouds are synthesized from the simulated world, clustered by
Euclidean distance into per-obstacle groups, and decomposed into plane /
cylinder / sphere primitives by iterative RANSAC. All randomized steps are
driven by explicit seeds and are bit-deterministic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree
from scipy.stats import norm as _norm

from .core import Polygon, Pose2, convex_hull
from .errors import DegenerateInput, EmptyCluster, NoFit

PLANE = "plane"
CYLINDER = "cylinder"
SPHERE = "sphere"
SHAPES = (PLANE, CYLINDER, SPHERE)


@dataclass
class PerceptionConfig:
    inlier_tol: float = 0.01          # m
    min_inliers: int = 50
    max_iters: int = 500
    stop_fraction: float = 0.1
    dist_threshold: float = 0.05      # m, Euclidean clustering
    ground_z: float = 0.02            # m, points below are dropped
    voxel_leaf: float = 0.02          # m, 0 disables down-sampling


@dataclass
class PointCloud:
    """Bag of 3D points plus the sensor pose that produced them."""

    points: np.ndarray                # (n, 3)
    sensor_pose: Pose2 = Pose2(0.0, 0.0, 0.0)
    sensor_height: float = 1.0

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 3)
        if self.points.size and not np.all(np.isfinite(self.points)):
            raise ValueError("point cloud contains non-finite points")

    def __len__(self):
        return len(self.points)


@dataclass
class Primitive:
    """Geometric primitive with dimensional parameters.

    For planes `width` and `height` span the face and `normal` is the
    unit surface normal (3D; ground-parallel for vertical faces). For
    cylinders and spheres only `radius` is set.
    """

    shape: str
    center: np.ndarray                # (3,)
    radius: float = 0.0               # cylinder / sphere
    width: float = 0.0                # plane d
    height: float = 0.0               # plane h
    normal: np.ndarray | None = None  # plane, unit (3,)
    inliers: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))

    @property
    def center2d(self):
        return self.center[:2]

    @property
    def normal2d(self):
        """Ground-plane component of the plane normal, unit if non-degenerate."""
        n2 = self.normal[:2]
        nn = np.linalg.norm(n2)
        return n2 / nn if nn > 1e-9 else n2


@dataclass
class Cluster:
    points: np.ndarray                # (m, 3)
    primitives: list = field(default_factory=list)

    def footprint(self) -> Polygon:
        return footprint(self)


# ---------------------------------------------------------------------------
# cloud synthesis

def _grid(lo, hi, spacing):
    n = max(2, int(round((hi - lo) / spacing)) + 1)
    return np.linspace(lo, hi, n)


def _sample_box(w, d, h, spacing):
    """Surface points + outward normals of a box footprint w x d, height h,
    centered at the origin in its own frame (base on the ground)."""
    pts, nrm = [], []
    xs = _grid(-w / 2, w / 2, spacing)
    ys = _grid(-d / 2, d / 2, spacing)
    zs = _grid(0.0, h, spacing)
    for sx in (-1.0, 1.0):                      # faces normal to x
        Y, Z = np.meshgrid(ys, zs, indexing="ij")
        P = np.stack([np.full(Y.size, sx * w / 2), Y.ravel(), Z.ravel()], axis=1)
        pts.append(P)
        nrm.append(np.tile([sx, 0.0, 0.0], (len(P), 1)))
    for sy in (-1.0, 1.0):                      # faces normal to y
        X, Z = np.meshgrid(xs, zs, indexing="ij")
        P = np.stack([X.ravel(), np.full(X.size, sy * d / 2), Z.ravel()], axis=1)
        pts.append(P)
        nrm.append(np.tile([0.0, sy, 0.0], (len(P), 1)))
    X, Y = np.meshgrid(xs, ys, indexing="ij")   # top
    P = np.stack([X.ravel(), Y.ravel(), np.full(X.size, h)], axis=1)
    pts.append(P)
    nrm.append(np.tile([0.0, 0.0, 1.0], (len(P), 1)))
    return np.concatenate(pts), np.concatenate(nrm)


def _sample_cylinder(r, h, spacing):
    na = max(8, int(round(2 * math.pi * r / spacing)))
    ang = np.arange(na) * (2 * math.pi / na)
    zs = _grid(0.0, h, spacing)
    A, Z = np.meshgrid(ang, zs, indexing="ij")
    ca, sa = np.cos(A.ravel()), np.sin(A.ravel())
    side = np.stack([r * ca, r * sa, Z.ravel()], axis=1)
    side_n = np.stack([ca, sa, np.zeros_like(ca)], axis=1)
    # top disc as concentric rings
    tops, top_n = [np.array([[0.0, 0.0, h]])], None
    for rr in _grid(spacing, r, spacing):
        nb = max(6, int(round(2 * math.pi * rr / spacing)))
        a = np.arange(nb) * (2 * math.pi / nb)
        tops.append(np.stack([rr * np.cos(a), rr * np.sin(a), np.full(nb, h)], axis=1))
    top = np.concatenate(tops)
    top_n = np.tile([0.0, 0.0, 1.0], (len(top), 1))
    return np.concatenate([side, top]), np.concatenate([side_n, top_n])


def _sample_sphere(r, spacing):
    npol = max(6, int(round(math.pi * r / spacing)))
    pol = np.linspace(0.0, math.pi, npol + 1)
    pts = [np.array([[0.0, 0.0, 2 * r], [0.0, 0.0, 0.0]])]
    for ph in pol[1:-1]:
        rr = r * math.sin(ph)
        nb = max(6, int(round(2 * math.pi * rr / spacing)))
        a = np.arange(nb) * (2 * math.pi / nb)
        pts.append(np.stack([rr * np.cos(a), rr * np.sin(a),
                             np.full(nb, r + r * math.cos(ph))], axis=1))
    P = np.concatenate(pts)
    center = np.array([0.0, 0.0, r])
    N = (P - center) / r
    return P, N


def sample_shape_surface(shape, spacing):
    """Deterministic surface sampling for a Shape3 descriptor."""
    kind = shape.kind
    if kind == "box":
        return _sample_box(shape.w, shape.d, shape.h, spacing)
    if kind == "cylinder":
        return _sample_cylinder(shape.r, shape.h, spacing)
    if kind == "sphere":
        return _sample_sphere(shape.r, spacing)
    raise ValueError(f"unknown shape kind {kind!r}")


def synthesize_cloud(world, robot_pose: Pose2, fov: float, sensing_range: float,
                     density: float, noise_sigma: float, seed: int) -> PointCloud:
    """Simulated depth snapshot of unregistered objects.

    Samples the visible surfaces of every unknown object within the field
    of view and range, with isotropic Gaussian noise. Deterministic for a
    fixed seed; occlusion between objects is not modeled.
    """
    if density <= 0 or sensing_range <= 0:
        raise ValueError("density and range must be positive")
    rng = np.random.default_rng(seed)
    spacing = 1.0 / math.sqrt(density)
    cam = np.array([robot_pose.x, robot_pose.y, world.sensor_height])
    out = []
    for obj in world.objects:
        if obj.known:
            continue
        local, local_n = sample_shape_surface(obj.shape, spacing)
        c, s = math.cos(obj.pose.theta), math.sin(obj.pose.theta)
        R = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
        P = local @ R.T + np.array([obj.pose.x, obj.pose.y, 0.0])
        N = local_n @ R.T
        rel = P - cam
        dist = np.linalg.norm(rel[:, :2], axis=1)
        bearing = np.arctan2(rel[:, 1], rel[:, 0]) - robot_pose.theta
        bearing = np.arctan2(np.sin(bearing), np.cos(bearing))
        visible = (dist <= sensing_range) \
            & (np.abs(bearing) <= fov / 2.0) \
            & (np.einsum("ij,ij->i", N, cam - P) > 0.0)
        P = P[visible]
        if noise_sigma > 0 and len(P):
            P = P + rng.normal(0.0, noise_sigma, P.shape)
        elif len(P):
            rng.normal(0.0, 1.0, P.shape)  # keep stream position seed-stable
        out.append(P)
    pts = np.concatenate(out) if out else np.empty((0, 3))
    return PointCloud(pts, robot_pose, world.sensor_height)


# ---------------------------------------------------------------------------
# clustering

def cluster_cloud(cloud: PointCloud, dist_threshold: float,
                  ground_z: float = 0.02) -> list[Cluster]:
    """Euclidean-distance clustering of the non-ground points.

    Two points share a cluster iff connected by a chain of neighbors each
    within dist_threshold. Clusters are ordered by their lowest point index.
    """
    if dist_threshold <= 0:
        raise ValueError("dist_threshold must be positive")
    pts = cloud.points
    pts = pts[pts[:, 2] >= ground_z]
    n = len(pts)
    if n == 0:
        return []
    pairs = cKDTree(pts).query_pairs(dist_threshold, output_type="ndarray")
    if len(pairs):
        data = np.ones(len(pairs))
        g = coo_matrix((data, (pairs[:, 0], pairs[:, 1])), shape=(n, n))
    else:
        g = coo_matrix((n, n))
    ncomp, labels = connected_components(g, directed=False)
    clusters = []
    seen = {}
    for i, lab in enumerate(labels):
        seen.setdefault(lab, []).append(i)
    for lab in sorted(seen, key=lambda l: seen[l][0]):
        clusters.append(Cluster(points=pts[np.array(seen[lab])]))
    return clusters


def voxel_downsample(points: np.ndarray, leaf: float) -> np.ndarray:
    """Average points per voxel of side `leaf`; deterministic ordering."""
    if leaf <= 0 or len(points) == 0:
        return np.asarray(points, dtype=float)
    pts = np.asarray(points, dtype=float)
    keys = np.floor(pts / leaf).astype(np.int64)
    order = np.lexsort((keys[:, 2], keys[:, 1], keys[:, 0]))
    keys, pts = keys[order], pts[order]
    change = np.any(np.diff(keys, axis=0) != 0, axis=1)
    bounds = np.concatenate([[0], np.nonzero(change)[0] + 1, [len(pts)]])
    return np.stack([pts[a:b].mean(axis=0) for a, b in zip(bounds[:-1], bounds[1:])])


# ---------------------------------------------------------------------------
# RANSAC fitting

def _blom(m: int) -> float:
    """Expected maximum of m standard normals (Blom approximation)."""
    if m <= 1:
        return 0.0
    return float(_norm.ppf((m - 0.375) / (m + 0.25)))


def _support_extent(t: np.ndarray, sigma: float):
    """Support length of noisy samples from a bounded interval.

    Plain max-min is exact for noiseless data; under noise the extremes
    overshoot the true edges, so each side is pulled back by the expected
    maximum of the noise among the points in its edge band.
    """
    lo, hi = float(t.min()), float(t.max())
    if sigma <= 1e-9:
        return hi - lo, 0.5 * (lo + hi)
    m_hi = int(np.sum(t > hi - 2.5 * sigma))
    m_lo = int(np.sum(t < lo + 2.5 * sigma))
    shrink_hi = sigma * _blom(m_hi)
    shrink_lo = sigma * _blom(m_lo)
    ext = max(hi - lo - shrink_hi - shrink_lo, 0.0)
    return ext, 0.5 * (lo + shrink_lo + hi - shrink_hi)


def _fit_plane_lsq(pts: np.ndarray) -> Primitive:
    """Least-squares plane through points (PCA), with extent parameters."""
    c = pts.mean(axis=0)
    q = pts - c
    _, _, vt = np.linalg.svd(q, full_matrices=False)
    n = vt[2]
    if n[2] < 0 or (abs(n[2]) < 1e-9 and (n[0] < 0 or (n[0] == 0 and n[1] < 0))):
        n = -n
    resid = q @ n
    sigma = float(np.std(resid))
    z = np.array([0.0, 0.0, 1.0])
    if abs(n[2]) < 0.99:
        e1 = np.cross(n, z)
        e1 /= np.linalg.norm(e1)       # horizontal in-plane axis (width)
    else:
        e1 = vt[0]
    e2 = np.cross(n, e1)
    if e2[2] < 0:
        e2 = -e2
    w_ext, w_mid = _support_extent(q @ e1, sigma)
    h_ext, h_mid = _support_extent(q @ e2, sigma)
    center = c + w_mid * e1 + h_mid * e2
    return Primitive(PLANE, center=center, width=w_ext, height=h_ext, normal=n)


def _fit_circle_lsq(xy: np.ndarray):
    """Algebraic (Kasa) least-squares circle fit."""
    A = np.column_stack([2 * xy, np.ones(len(xy))])
    b = (xy ** 2).sum(axis=1)
    sol, *_ = np.linalg.lstsq(A, b, rcond=None)
    cx, cy, k = sol
    r = math.sqrt(max(k + cx * cx + cy * cy, 0.0))
    return np.array([cx, cy]), r


def _fit_sphere_lsq(pts: np.ndarray):
    A = np.column_stack([2 * pts, np.ones(len(pts))])
    b = (pts ** 2).sum(axis=1)
    sol, *_ = np.linalg.lstsq(A, b, rcond=None)
    c = sol[:3]
    r = math.sqrt(max(sol[3] + float(c @ c), 0.0))
    return c, r


def _plane_inliers(pts, p0, n, tol):
    return np.abs((pts - p0) @ n) < tol


def ransac_fit(cluster_points: np.ndarray, shape: str, inlier_tol: float,
               min_inliers: int, max_iters: int, seed: int) -> Primitive:
    """Fit one primitive of the given shape by RANSAC + least-squares refit.

    Deterministic for a fixed seed. Raises NoFit when the best consensus
    set is smaller than min_inliers.
    """
    if inlier_tol <= 0 or min_inliers <= 0 or max_iters <= 0:
        raise ValueError("RANSAC tolerances must be positive")
    pts = np.asarray(cluster_points, dtype=float)
    n = len(pts)
    rng = np.random.default_rng(seed)
    need = {PLANE: 3, CYLINDER: 3, SPHERE: 4}[shape]
    if n < max(need, min_inliers):
        raise NoFit(f"{n} points < min_inliers {min_inliers}")

    best_count = 0
    best_mask = None
    for _ in range(max_iters):
        idx = rng.choice(n, size=need, replace=False)
        sample = pts[idx]
        mask = None
        if shape == PLANE:
            v1, v2 = sample[1] - sample[0], sample[2] - sample[0]
            nv = np.cross(v1, v2)
            nn = np.linalg.norm(nv)
            if nn < 1e-12:
                continue
            mask = _plane_inliers(pts, sample[0], nv / nn, inlier_tol)
        elif shape == CYLINDER:
            # vertical axis: circle through the 3 xy projections
            xy = sample[:, :2]
            a = 2 * (xy[1] - xy[0])
            b = 2 * (xy[2] - xy[0])
            M = np.array([a, b])
            rhs = np.array([(xy[1] ** 2 - xy[0] ** 2).sum(),
                            (xy[2] ** 2 - xy[0] ** 2).sum()])
            det = np.linalg.det(M)
            if abs(det) < 1e-12:
                continue
            c = np.linalg.solve(M, rhs)
            r = np.linalg.norm(xy[0] - c)
            if r < 1e-6 or r > 5.0:
                continue
            mask = np.abs(np.linalg.norm(pts[:, :2] - c, axis=1) - r) < inlier_tol
        else:  # sphere
            A = np.column_stack([2 * sample, np.ones(4)])
            if abs(np.linalg.det(A[:, [0, 1, 2, 3]])) < 1e-12:
                continue
            try:
                sol = np.linalg.solve(A, (sample ** 2).sum(axis=1))
            except np.linalg.LinAlgError:
                continue
            c = sol[:3]
            r = math.sqrt(max(sol[3] + float(c @ c), 0.0))
            if r < 1e-6 or r > 5.0:
                continue
            mask = np.abs(np.linalg.norm(pts - c, axis=1) - r) < inlier_tol
        count = int(mask.sum())
        if count > best_count:
            best_count = count
            best_mask = mask
            if count > 0.95 * n:
                break

    if best_count < min_inliers:
        raise NoFit(f"best consensus {best_count} < min_inliers {min_inliers}")

    inl = np.nonzero(best_mask)[0]
    sub = pts[inl]
    if shape == PLANE:
        prim = _fit_plane_lsq(sub)
        # one re-selection pass against the refit model for stability
        mask = _plane_inliers(pts, prim.center, prim.normal, inlier_tol)
        if mask.sum() >= min_inliers:
            inl = np.nonzero(mask)[0]
            prim = _fit_plane_lsq(pts[inl])
        prim.inliers = inl
        return prim
    if shape == CYLINDER:
        c, r = _fit_circle_lsq(sub[:, :2])
        mask = np.abs(np.linalg.norm(pts[:, :2] - c, axis=1) - r) < inlier_tol
        if mask.sum() >= min_inliers:
            inl = np.nonzero(mask)[0]
            c, r = _fit_circle_lsq(pts[inl][:, :2])
        zc = float(pts[inl][:, 2].mean())
        return Primitive(CYLINDER, center=np.array([c[0], c[1], zc]),
                         radius=float(r), inliers=inl)
    c, r = _fit_sphere_lsq(sub)
    mask = np.abs(np.linalg.norm(pts - c, axis=1) - r) < inlier_tol
    if mask.sum() >= min_inliers:
        inl = np.nonzero(mask)[0]
        c, r = _fit_sphere_lsq(pts[inl])
    return Primitive(SPHERE, center=np.asarray(c, dtype=float), radius=float(r),
                     inliers=inl)


def extract_primitives(cluster: Cluster, config: PerceptionConfig,
                       seed: int = 0) -> list[Primitive]:
    """Iteratively peel the best-supported primitive off the cluster.

    Each round fits all three shapes on the remaining points, keeps the
    one with the most inliers (ties: plane > cylinder > sphere), removes
    its inliers, and repeats until fewer than stop_fraction of the
    original points remain or nothing fits.
    """
    if len(cluster.points) == 0:
        raise EmptyCluster("cannot extract primitives from an empty cluster")
    pts = cluster.points
    remaining = np.arange(len(pts))
    primitives: list[Primitive] = []
    round_no = 0
    while len(remaining) >= config.stop_fraction * len(pts) and len(remaining) > 0:
        best = None
        for si, shape in enumerate(SHAPES):
            try:
                prim = ransac_fit(pts[remaining], shape, config.inlier_tol,
                                  config.min_inliers, config.max_iters,
                                  seed + 1000 * round_no + si)
            except NoFit:
                continue
            if best is None or len(prim.inliers) > len(best.inliers):
                best = prim
        if best is None:
            break
        best.inliers = remaining[best.inliers]
        primitives.append(best)
        remaining = np.setdiff1d(remaining, best.inliers, assume_unique=True)
        round_no += 1
    cluster.primitives = primitives
    return primitives


def footprint(cluster: Cluster) -> Polygon:
    """Convex hull of the cluster's ground projection."""
    if len(cluster.points) < 3:
        raise DegenerateInput("footprint needs >= 3 points")
    return convex_hull(cluster.points[:, :2])


# ---------------------------------------------------------------------------
# text I/O ("x y z" per line, '#' comments)

def save_cloud(cloud: PointCloud, path) -> None:
    with open(path, "w") as f:
        f.write("# x y z (meters)\n")
        for p in cloud.points:
            f.write(f"{p[0]:.9g} {p[1]:.9g} {p[2]:.9g}\n")


def load_cloud(path) -> PointCloud:
    pts = []
    with open(path) as f:
        for raw in f:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            vals = line.split()
            if len(vals) != 3:
                raise ValueError(f"expected 3 values per line, got {line!r}")
            pts.append([float(v) for v in vals])
    return PointCloud(np.array(pts) if pts else np.empty((0, 3)))
