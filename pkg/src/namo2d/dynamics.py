"""Planar rigid-body dynamics with smooth virtual contact forces.

The robot is a velocity-commanded (kinematic) disc; movable objects are
dynamic bodies with ground friction. Two force channels act on objects:

* penalty physical contact against the base (stiff spring + damping +
  regularized Coulomb contact friction), and
* virtual forces gamma = k * exp(-alpha * phi) per (base, object edge)
  contact pair, whose stiffnesses k are control inputs for the optimizer.

Controls are zero-order-held over a step; integration is semi-implicit
Euler at a fixed internal substep. `step_batch` integrates a batch of
(state, control) rows at once, which is what makes finite-difference
linearization affordable.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import Circle, Polygon, Vec2
from .errors import NonFiniteState

GRAVITY = 9.81


@dataclass
class ObjectProps:
    """Physical parameters of one movable object.

    The footprint polygon is expressed in the body frame with the center
    of mass at the origin.
    """

    mass: float
    inertia: float
    mu_s: float
    mu_v: float
    footprint: Polygon

    def __post_init__(self):
        if self.mass <= 0 or self.inertia <= 0 or self.mu_s < 0:
            raise ValueError("mass and inertia must be positive, mu_s >= 0")


@dataclass
class VscmParams:
    alpha: float = 25.0     # 1/m, decay curvature of the virtual force
    k_max: float = 30.0     # upper bound on virtual stiffness

    def __post_init__(self):
        if self.alpha <= 0 or self.k_max <= 0:
            raise ValueError("alpha and k_max must be positive")


@dataclass
class ContactPair:
    object_id: int
    edge_id: int
    a: Vec2                 # edge start, world frame
    b: Vec2                 # edge end, world frame
    n: Vec2                 # outward unit normal of the edge
    l: Vec2                 # object COM -> base center


def virtual_force_magnitude(k_i: float, phi_i: float, params: VscmParams) -> float:
    """Normal virtual force k * exp(-alpha * phi)."""
    if k_i < 0:
        raise ValueError("stiffness must be nonnegative")
    return k_i * math.exp(-params.alpha * phi_i)


def generalized_virtual_wrench(pair: ContactPair, gamma: float):
    """Planar generalized force (fx, fy, tau) of one virtual contact.

    f = gamma * n, tau = gamma * (l x n); the 3D identity/skew stack of
    the smooth contact model reduces to this in SE(2).
    """
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    f = Vec2(gamma * pair.n.x, gamma * pair.n.y)
    tau = gamma * (pair.l.x * pair.n.y - pair.l.y * pair.n.x)
    return f, tau


class DynamicsModel:
    """World model for simulation and trajectory optimization.

    State x = [q_r (3), q_o (3 per object), qdot_r (3), qdot_o (3 per
    object)]; control u = [commanded base velocity (3, world frame),
    virtual stiffness per contact pair (n_p)]. Headings in the state are
    kept unwrapped so finite differences stay smooth.
    """

    def __init__(self, robot_radius: float, objects: list[ObjectProps],
                 vscm: VscmParams | None = None, k_pen: float = 2000.0,
                 mu_contact: float = 0.3, v_eps: float = 0.01,
                 dt_sub: float = 0.01):
        self.robot_radius = float(robot_radius)
        self.objects = list(objects)
        self.vscm = vscm or VscmParams()
        self.k_pen = float(k_pen)
        self.mu_contact = float(mu_contact)
        self.v_eps = float(v_eps)
        self.dt_sub = float(dt_sub)
        self.n_o = len(objects)
        self.n_x = 6 + 6 * self.n_o
        self.edge_counts = [len(o.footprint) for o in objects]
        self.n_p = sum(self.edge_counts)
        self.n_u = 3 + self.n_p
        # body-frame edge geometry cached per object
        self._body_verts = [o.footprint.vertices.copy() for o in objects]

    # -- state layout helpers ------------------------------------------------

    def q_slice(self, obj: int):
        return slice(3 + 3 * obj, 6 + 3 * obj)

    def v_slice(self, obj: int):
        base = 3 + 3 * self.n_o
        return slice(base + 3 + 3 * obj, base + 6 + 3 * obj)

    @property
    def rv_slice(self):
        base = 3 + 3 * self.n_o
        return slice(base, base + 3)

    def pack_state(self, robot_pose, robot_vel, obj_poses, obj_vels) -> np.ndarray:
        x = np.zeros(self.n_x)
        x[0:3] = np.asarray(robot_pose, dtype=float)
        x[self.rv_slice] = np.asarray(robot_vel, dtype=float)
        for i in range(self.n_o):
            x[self.q_slice(i)] = np.asarray(obj_poses[i], dtype=float)
            x[self.v_slice(i)] = np.asarray(obj_vels[i], dtype=float)
        return x

    def k_slice_for_object(self, obj: int):
        off = 3 + sum(self.edge_counts[:obj])
        return slice(off, off + self.edge_counts[obj])

    # -- geometry ------------------------------------------------------------

    def world_edges(self, x: np.ndarray, obj: int):
        """Edge start/end/outward normal arrays for one object pose."""
        q = x[self.q_slice(obj)]
        c, s = math.cos(q[2]), math.sin(q[2])
        R = np.array([[c, -s], [s, c]])
        W = self._body_verts[obj] @ R.T + q[:2]
        a = W
        b = np.roll(W, -1, axis=0)
        t = b - a
        n = np.stack([t[:, 1], -t[:, 0]], axis=1)
        n /= np.linalg.norm(n, axis=1, keepdims=True)
        return a, b, n

    def edge_signed_distances(self, x: np.ndarray, obj: int):
        """Per-edge signed distance phi from the base disc, plus geometry.

        phi = segment distance - radius; when the base center is inside
        the (convex) footprint only the nearest edge goes negative past
        -radius, measuring the true penetration depth.
        """
        X = x[None, :]
        _, phi, q, n = self._edge_phi_batch(X, obj)
        return phi[0], q[0], n[0]

    def contact_pairs(self, x: np.ndarray) -> list[ContactPair]:
        """Contact pairs recomputed from the current poses."""
        pairs = []
        c = x[0:2]
        for obj in range(self.n_o):
            a, b, n = self.world_edges(x, obj)
            com = x[self.q_slice(obj)][:2]
            l = Vec2(c[0] - com[0], c[1] - com[1])
            for e in range(len(a)):
                pairs.append(ContactPair(obj, e, Vec2(*a[e]), Vec2(*b[e]),
                                         Vec2(*n[e]), l))
        return pairs

    def physical_contact_force(self, x: np.ndarray, obj: int):
        """Penalty contact wrench applied to the object by the base.

        Penetrating edges (phi < 0) produce a normal force of magnitude
        k_pen * (-phi) plus damping, directed along the inward edge
        normal (pushing the object away from the base), and a regularized
        tangential friction force. Torque is about the object COM.
        """
        f, tau = self._contact_wrench_single(x, obj)
        return Vec2(*f), float(tau)

    def _contact_wrench_single(self, x, obj):
        X = x[None, :]
        F, T = self._contact_wrench_batch(X, obj)
        return F[0], T[0]

    # -- batched force evaluation ---------------------------------------------

    def _object_frames(self, X, obj):
        q = X[:, self.q_slice(obj)]
        th = q[:, 2]
        c, s = np.cos(th), np.sin(th)
        V = self._body_verts[obj]                     # (m,2)
        # W[b, i] = R(th_b) V[i] + p_b
        Wx = V[:, 0][None, :] * c[:, None] - V[:, 1][None, :] * s[:, None]
        Wy = V[:, 0][None, :] * s[:, None] + V[:, 1][None, :] * c[:, None]
        W = np.stack([Wx + q[:, 0:1], Wy + q[:, 1:2]], axis=2)  # (B,m,2)
        return q, W

    def _edge_phi_batch(self, X, obj):
        q, W = self._object_frames(X, obj)
        a = W
        b = np.roll(W, -1, axis=1)
        t_edge = b - a
        n = np.stack([t_edge[:, :, 1], -t_edge[:, :, 0]], axis=2)
        n /= np.linalg.norm(n, axis=2, keepdims=True)
        c = X[:, 0:2][:, None, :]                     # (B,1,2)
        ab = t_edge
        denom = np.einsum("bij,bij->bi", ab, ab)
        t = np.clip(np.einsum("bij,bij->bi", c - a, ab) / denom, 0.0, 1.0)
        qp = a + t[..., None] * ab                    # closest point (B,m,2)
        dvec = c - qp
        dist = np.linalg.norm(dvec, axis=2)
        s = np.einsum("bij,bij->bi", c - a, n)
        phi = dist - self.robot_radius
        # footprints are convex hulls: center inside iff behind every edge;
        # then only the nearest edge carries the penetration depth
        inside = np.all(s < 0.0, axis=1)
        if inside.any():
            nearest = dist == dist.min(axis=1, keepdims=True)
            flip = inside[:, None] & nearest
            phi = np.where(flip, -dist - self.robot_radius, phi)
        return q, phi, qp, n

    def _contact_wrench_batch(self, X, obj):
        """Penalty contact wrench (force (B,2), torque (B,)) on the object."""
        props = self.objects[obj]
        q, phi, qp, n = self._edge_phi_batch(X, obj)
        pen = np.maximum(-phi, 0.0)                   # (B,m)
        active = pen > 0.0
        if not active.any():
            B = len(X)
            return np.zeros((B, 2)), np.zeros(B)
        vr = X[:, self.rv_slice][:, :2]               # base velocity
        vo = X[:, self.v_slice(obj)]
        r = qp - q[:, None, :2]                       # COM -> contact point
        # contact-point velocity of the object: v + omega x r
        vcp = vo[:, None, :2] + np.stack(
            [-r[:, :, 1], r[:, :, 0]], axis=2) * vo[:, 2][:, None, None]
        rel = vr[:, None, :] - vcp                    # robot relative to object
        rel_n = np.einsum("bij,bij->bi", rel, n)
        # damping only while approaching (rel_n < 0 = closing)
        c_damp = 2.0 * math.sqrt(self.k_pen * props.mass)
        fmag = np.maximum(self.k_pen * pen - c_damp * np.minimum(rel_n, 0.0), 0.0)
        fmag = np.where(active, fmag, 0.0)
        f = -fmag[..., None] * n                      # push object away from base
        # tangential contact friction drags the object with the base
        tdir = rel - rel_n[..., None] * n
        tnorm = np.linalg.norm(tdir, axis=2)
        scale = np.where(tnorm > 1e-12,
                         self.mu_contact * fmag
                         * np.tanh(tnorm / self.v_eps) / np.maximum(tnorm, 1e-12),
                         0.0)
        f = f + scale[..., None] * tdir
        tau = r[:, :, 0] * f[:, :, 1] - r[:, :, 1] * f[:, :, 0]
        return f.sum(axis=1), tau.sum(axis=1)

    def _virtual_wrench_batch(self, X, U, obj):
        """Virtual-force wrench on the object from its contact pairs.

        gamma = k * exp(-alpha * phi); the force acts along the inward
        edge normal, and the torque uses the COM-to-base lever arm.
        """
        q, phi, _, n = self._edge_phi_batch(X, obj)
        k = U[:, self.k_slice_for_object(obj)]
        # clip deep penetration in the exponent for numerical safety
        gamma = k * np.exp(-self.vscm.alpha * np.maximum(phi, -0.2))
        f = (-gamma)[..., None] * n
        l = X[:, 0:2] - q[:, :2]                      # COM -> base
        cross_ln = l[:, 0:1] * n[:, :, 1] - l[:, 1:2] * n[:, :, 0]
        tau = -gamma * cross_ln
        return f.sum(axis=1), tau.sum(axis=1)

    # -- integration -----------------------------------------------------------

    def step_batch(self, X: np.ndarray, U: np.ndarray, dt: float) -> np.ndarray:
        """Advance a batch of states one control period.

        X is (B, n_x), U is (B, n_u); controls are held over the whole
        period while physics substeps at dt_sub.
        """
        if dt <= 0:
            raise ValueError("dt must be positive")
        X = np.array(X, dtype=float)
        U = np.asarray(U, dtype=float)
        n_sub = max(1, int(round(dt / self.dt_sub)))
        h = dt / n_sub
        rv = self.rv_slice
        for _ in range(n_sub):
            X[:, rv] = U[:, 0:3]
            X[:, 0:3] += h * U[:, 0:3]
            for obj in range(self.n_o):
                props = self.objects[obj]
                fc, tc = self._contact_wrench_batch(X, obj)
                fv, tv = self._virtual_wrench_batch(X, U, obj)
                v = X[:, self.v_slice(obj)]
                v2 = v.copy()
                v2[:, :2] += h * (fc + fv) / props.mass
                v2[:, 2] += h * (tc + tv) / props.inertia
                # ground friction as a velocity decay capped at a full stop,
                # so the substep stays stable even at the friction cone apex
                speed = np.linalg.norm(v2[:, :2], axis=1)
                decel = props.mu_s * GRAVITY * np.tanh(speed / self.v_eps) \
                    + (props.mu_v / props.mass) * speed
                factor = np.clip(
                    1.0 - h * decel / np.maximum(speed, 1e-12), 0.0, 1.0)
                v2[:, :2] *= factor[:, None]
                r_eff = math.sqrt(props.inertia / props.mass)
                wabs = np.abs(v2[:, 2])
                decel_w = (props.mu_s * GRAVITY / r_eff) \
                    * np.tanh(wabs * r_eff / self.v_eps) \
                    + (props.mu_v / props.mass) * wabs
                factor_w = np.clip(
                    1.0 - h * decel_w / np.maximum(wabs, 1e-12), 0.0, 1.0)
                v2[:, 2] *= factor_w
                X[:, self.v_slice(obj)] = v2
                X[:, self.q_slice(obj)] += h * v2
        if not np.all(np.isfinite(X)):
            raise NonFiniteState("integration produced non-finite state")
        return X

    def step(self, x: np.ndarray, u: np.ndarray, dt: float) -> np.ndarray:
        """Single-state convenience wrapper around step_batch."""
        return self.step_batch(np.asarray(x, dtype=float)[None, :],
                               np.asarray(u, dtype=float)[None, :], dt)[0]

    def rollout(self, x0: np.ndarray, U, dt: float) -> np.ndarray:
        """Integrate a control sequence; returns (N+1, n_x) with X[0]=x0."""
        U = np.asarray(U, dtype=float)
        N = len(U)
        X = np.zeros((N + 1, self.n_x))
        X[0] = x0
        for i in range(N):
            try:
                X[i + 1] = self.step(X[i], U[i], dt)
            except NonFiniteState as e:
                raise NonFiniteState(str(e), step_index=i) from None
        return X


def contact_pairs(model: DynamicsModel, x: np.ndarray) -> list[ContactPair]:
    return model.contact_pairs(x)


def physical_contact_force(model: DynamicsModel, x: np.ndarray, object_id: int):
    return model.physical_contact_force(x, object_id)


def base_circle(model: DynamicsModel, x: np.ndarray) -> Circle:
    return Circle(Vec2(float(x[0]), float(x[1])), model.robot_radius)
