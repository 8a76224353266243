"""Contact-implicit trajectory optimization by successive convexification.

The nonlinear program: minimize a terminal goal cost plus integrated
effort and virtual-stiffness costs, subject to the simulator dynamics and
box bounds on states and controls. Outer loop: re-integrate the state
trajectory with the full nonlinear dynamics (so it is always dynamically
feasible), linearize by central finite differences, solve a box-
constrained convex QP inside an infinity-norm trust region, and update
the trust region from the agreement ratio between actual and predicted
cost decrease. Virtual stiffnesses are penalized linearly and vanish as a
physically consistent pushing motion emerges.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import DynamicsModel
from .errors import DimensionMismatch, MaxInnerIterations, SubproblemInfeasible


@dataclass
class CitoWeights:
    w1: float = 2.5e3       # terminal goal deviation
    w2: float = 1.0e-4      # velocity effort
    w3: float = 7.0         # virtual stiffness L1


@dataclass
class TrustRegion:
    rho0: float = 0.0       # acceptance threshold on the agreement ratio
    rho1: float = 0.25      # shrink below this
    rho2: float = 0.7       # grow above this
    shrink: float = 2.0
    grow: float = 1.5
    radius: float = 1.0


@dataclass
class CitoProblem:
    model: DynamicsModel
    N: int
    dt: float
    x0: np.ndarray
    goal: np.ndarray                        # (2,) position-only goal
    u_lo: np.ndarray
    u_hi: np.ndarray
    x_lo: np.ndarray
    x_hi: np.ndarray
    weights: CitoWeights = field(default_factory=CitoWeights)

    def __post_init__(self):
        self.x0 = np.asarray(self.x0, dtype=float)
        self.goal = np.asarray(self.goal, dtype=float)
        for name in ("u_lo", "u_hi", "x_lo", "x_hi"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float))
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if np.any(self.u_lo > self.u_hi) or np.any(self.x_lo > self.x_hi):
            raise ValueError("box bounds must be ordered")


def default_bounds(model: DynamicsModel, corridor, v_base=2.0, w_base=2.0,
                   v_obj=5.0):
    """Control and state box bounds for a rectangular free corridor.

    corridor = (xmin, ymin, xmax, ymax) applies to the robot and every
    object position; headings and velocities get generous bounds.
    """
    xmin, ymin, xmax, ymax = corridor
    u_lo = np.concatenate([[-v_base, -v_base, -w_base], np.zeros(model.n_p)])
    u_hi = np.concatenate([[v_base, v_base, w_base],
                           np.full(model.n_p, model.vscm.k_max)])
    x_lo = np.full(model.n_x, -np.inf)
    x_hi = np.full(model.n_x, np.inf)
    for sl in [slice(0, 3)] + [model.q_slice(i) for i in range(model.n_o)]:
        x_lo[sl] = [xmin, ymin, -4 * math.pi]
        x_hi[sl] = [xmax, ymax, 4 * math.pi]
    x_lo[model.rv_slice] = [-v_base, -v_base, -w_base]
    x_hi[model.rv_slice] = [v_base, v_base, w_base]
    for i in range(model.n_o):
        x_lo[model.v_slice(i)] = -v_obj
        x_hi[model.v_slice(i)] = v_obj
    return u_lo, u_hi, x_lo, x_hi


# ---------------------------------------------------------------------------
# cost terms

def cost_final(x_final: np.ndarray, goal: np.ndarray, w1: float) -> float:
    """Terminal cost on planar position deviation; heading excluded."""
    e = x_final[0:2] - goal
    return w1 * float(e @ e)


def cost_integrated(x: np.ndarray, u: np.ndarray, w2: float, w3: float,
                    model: DynamicsModel) -> float:
    """Running cost: squared velocities of all bodies + L1 stiffness."""
    vel = x[3 + 3 * model.n_o:]
    k = u[3:]
    if np.any(k < -1e-12):
        raise ValueError("stiffness entries must be nonnegative")
    return w2 * float(vel @ vel) + w3 * float(np.abs(k).sum())


def total_cost(X: np.ndarray, U: np.ndarray, problem: CitoProblem) -> float:
    X = np.asarray(X, dtype=float)
    U = np.asarray(U, dtype=float)
    if len(X) != problem.N + 1 or len(U) != problem.N:
        raise DimensionMismatch(
            f"expected {problem.N + 1} states / {problem.N} controls, "
            f"got {len(X)} / {len(U)}")
    w = problem.weights
    c = cost_final(X[-1], problem.goal, w.w1)
    for i in range(problem.N):
        c += cost_integrated(X[i], U[i], w.w2, w.w3, problem.model)
    return c


# ---------------------------------------------------------------------------
# linearization

def linearize(model: DynamicsModel, x: np.ndarray, u: np.ndarray, dt: float,
              fd_step: float = 1e-6):
    """Central-difference Jacobians A = df/dx, B = df/du of one step."""
    if fd_step <= 0:
        raise ValueError("fd_step must be positive")
    n_x, n_u = model.n_x, model.n_u
    B = 2 * (n_x + n_u)
    Xb = np.tile(x, (B, 1))
    Ub = np.tile(u, (B, 1))
    for j in range(n_x):
        Xb[2 * j, j] += fd_step
        Xb[2 * j + 1, j] -= fd_step
    for j in range(n_u):
        r = 2 * n_x + 2 * j
        Ub[r, j] += fd_step
        Ub[r + 1, j] -= fd_step
    Y = model.step_batch(Xb, Ub, dt)
    A = np.empty((n_x, n_x))
    Bm = np.empty((n_x, n_u))
    for j in range(n_x):
        A[:, j] = (Y[2 * j] - Y[2 * j + 1]) / (2 * fd_step)
    for j in range(n_u):
        r = 2 * n_x + 2 * j
        Bm[:, j] = (Y[r] - Y[r + 1]) / (2 * fd_step)
    return A, Bm


def _sensitivities(A_list, B_list):
    """S_i mapping stacked control perturbations to state perturbations.

    delta_x[0] = 0; delta_x[i+1] = A_i delta_x[i] + B_i delta_u[i].
    Returns a list of (n_x, N*n_u) matrices S_0..S_N.
    """
    N = len(A_list)
    n_x = A_list[0].shape[0]
    n_u = B_list[0].shape[1]
    S = [np.zeros((n_x, N * n_u))]
    for i in range(N):
        Si1 = A_list[i] @ S[i]
        Si1[:, i * n_u:(i + 1) * n_u] += B_list[i]
        S.append(Si1)
    return S


# ---------------------------------------------------------------------------
# box-constrained QP by operator splitting (ADMM with over-relaxation)

def solve_box_qp(P, q, A, lo, hi, tol=1e-6, max_iters=10000, sigma=1e-6,
                 rho=0.1, alpha=1.6):
    """Minimize 0.5 z'Pz + q'z subject to lo <= Az <= hi.

    Alternates an equality-constrained linear solve with projection onto
    the box, with over-relaxation. Deterministic; raises
    MaxInnerIterations if the residual tolerance is not met.
    """
    n = len(q)
    m = A.shape[0]
    if np.any(lo > hi + 1e-12):
        raise SubproblemInfeasible("box bounds are crossed")
    z = np.zeros(n)
    zt = np.clip(A @ z, lo, hi)
    y = np.zeros(m)
    AT = A.T

    def factor(rho_):
        M = P + sigma * np.eye(n) + rho_ * (AT @ A)
        return np.linalg.cholesky(M)

    L = factor(rho)
    for it in range(max_iters):
        rhs = sigma * z - q + AT @ (rho * zt - y)
        z_new = np.linalg.solve(L.T, np.linalg.solve(L, rhs))
        Az = A @ z_new
        Az_rel = alpha * Az + (1 - alpha) * zt
        zt_new = np.clip(Az_rel + y / rho, lo, hi)
        y = y + rho * (Az_rel - zt_new)
        r_prim = float(np.max(np.abs(Az - zt_new))) if m else 0.0
        r_dual = float(np.max(np.abs(rho * (AT @ (zt_new - zt))))) if m else 0.0
        z, zt = z_new, zt_new
        # residuals scaled by the size of the quantities they compare
        sc_prim = max(1.0, float(np.max(np.abs(Az))), float(np.max(np.abs(zt))))
        sc_dual = max(1.0, float(np.max(np.abs(P @ z))),
                      float(np.max(np.abs(q))))
        if r_prim < tol * sc_prim and r_dual < tol * sc_dual:
            return z, y
    # the iterate is still useful when residuals are merely loose: the
    # outer trust-region loop tolerates inexact subproblem solutions
    if r_prim < 1e-3 * sc_prim and r_dual < 1e-3 * sc_dual:
        return z, y
    raise MaxInnerIterations(f"QP not converged in {max_iters} iterations")


def solve_subproblem(problem: CitoProblem, X, U, A_list, B_list, radius):
    """Convex subproblem around (X, U) within an infinity-norm trust region.

    Returns (U_new, X_lin, predicted_cost). States are eliminated through
    the linearized dynamics, so state box bounds become general linear
    inequalities handled by the operator-splitting QP.
    """
    model = problem.model
    w = problem.weights
    N, n_x, n_u = problem.N, model.n_x, model.n_u
    S = _sensitivities(A_list, B_list)
    nz = N * n_u

    vel_sl = slice(3 + 3 * model.n_o, n_x)
    P = np.zeros((nz, nz))
    q = np.zeros(nz)
    # terminal position cost
    E_SN = S[N][0:2, :]
    P += 2 * w.w1 * (E_SN.T @ E_SN)
    q += 2 * w.w1 * (E_SN.T @ (X[N][0:2] - problem.goal))
    # velocity effort on x_1..x_{N-1} (x_0 fixed, its term is constant)
    for i in range(1, N):
        Vi = S[i][vel_sl, :]
        P += 2 * w.w2 * (Vi.T @ Vi)
        q += 2 * w.w2 * (Vi.T @ X[i][vel_sl])
    # linear L1 stiffness term (k >= 0 enforced by bounds)
    for i in range(N):
        q[i * n_u + 3:(i + 1) * n_u] += w.w3

    # control box intersected with the trust region -> pure box on z
    dU_lo = np.maximum(np.tile(problem.u_lo, N) - U.ravel(), -radius)
    dU_hi = np.minimum(np.tile(problem.u_hi, N) - U.ravel(), radius)
    rows = [np.eye(nz)]
    lows = [dU_lo]
    highs = [dU_hi]
    # state bounds on x_1..x_N where finite
    finite = np.isfinite(problem.x_lo) | np.isfinite(problem.x_hi)
    idx = np.nonzero(finite)[0]
    for i in range(1, N + 1):
        G = S[i][idx, :]
        nonzero = np.any(G != 0.0, axis=1)
        if not nonzero.any():
            continue
        sel = idx[nonzero]
        rows.append(S[i][sel, :])
        lows.append(problem.x_lo[sel] - X[i][sel])
        highs.append(problem.x_hi[sel] - X[i][sel])
    Amat = np.concatenate(rows, axis=0)
    lo = np.concatenate(lows)
    hi = np.concatenate(highs)

    z, _ = solve_box_qp(P, q, Amat, lo, hi)
    z = np.clip(z, dU_lo, dU_hi)        # snap residual tolerance into the box
    U_new = U + z.reshape(N, n_u)
    U_new = np.clip(U_new, problem.u_lo, problem.u_hi)
    X_lin = np.array([X[i] + S[i] @ z for i in range(N + 1)])
    predicted = total_cost(X_lin, U_new, problem)
    return U_new, X_lin, predicted


# ---------------------------------------------------------------------------
# outer loop

@dataclass
class ScvxConfig:
    trust: TrustRegion = field(default_factory=TrustRegion)
    initial_radius_scale: float = 0.5   # of the largest finite control range
    tol_cost: float = 1e-3
    tol_radius: float = 1e-4
    max_iters: int = 100
    fd_step: float = 1e-6


@dataclass
class CitoSolution:
    U: np.ndarray
    X: np.ndarray                       # full nonlinear rollout of U
    cost: float
    iterations: int
    converged: bool
    max_terminal_stiffness: float
    trace: list = field(default_factory=list)
    first_accepted_stiffness_sum: float = 0.0
    final_stiffness_sum: float = 0.0


def straight_line_init(problem: CitoProblem) -> np.ndarray:
    """Constant velocity toward the goal, zero stiffness, clipped to bounds."""
    model = problem.model
    U = np.zeros((problem.N, model.n_u))
    v = (problem.goal - problem.x0[0:2]) / (problem.N * problem.dt)
    U[:, 0:2] = v
    return np.clip(U, problem.u_lo, problem.u_hi)


def scvx_solve(problem: CitoProblem, U_init=None,
               config: ScvxConfig | None = None) -> CitoSolution:
    """Successive convexification with nonlinear re-integration.

    Each iteration rolls the current controls through the full dynamics
    (the state trajectory is always feasible), linearizes about it,
    solves the trust-region subproblem, and accepts or rejects based on
    the ratio of actual to predicted cost decrease.
    """
    cfg = config or ScvxConfig()
    model = problem.model
    U = straight_line_init(problem) if U_init is None else \
        np.clip(np.asarray(U_init, dtype=float), problem.u_lo, problem.u_hi)
    X = model.rollout(problem.x0, U, problem.dt)
    J = total_cost(X, U, problem)

    rng_span = problem.u_hi - problem.u_lo
    radius = cfg.initial_radius_scale * float(np.max(rng_span[np.isfinite(rng_span)]))
    tr = cfg.trust
    trace = []
    converged = False
    first_accepted_k = None
    lin = None
    iterations = 0
    for it in range(cfg.max_iters):
        iterations = it + 1
        if lin is None:
            AB = [linearize(model, X[i], U[i], problem.dt, cfg.fd_step)
                  for i in range(problem.N)]
            lin = ([ab[0] for ab in AB], [ab[1] for ab in AB])
        try:
            U_new, _, predicted = solve_subproblem(
                problem, X, U, lin[0], lin[1], radius)
        except (MaxInnerIterations, SubproblemInfeasible):
            radius /= tr.shrink
            if radius < cfg.tol_radius:
                converged = False
                break
            continue
        X_new = model.rollout(problem.x0, U_new, problem.dt)
        J_new = total_cost(X_new, U_new, problem)
        pred_dec = J - predicted
        act_dec = J - J_new
        if pred_dec <= 1e-12:
            # model claims no improvement is possible inside the region
            if abs(act_dec) < cfg.tol_cost:
                converged = True
                break
            radius /= tr.shrink
            if radius < cfg.tol_radius:
                converged = True
                break
            continue
        ratio = act_dec / pred_dec
        accepted = ratio >= tr.rho0 and act_dec >= 0.0
        trace.append({"iteration": it, "cost": J_new if accepted else J,
                      "ratio": ratio, "radius": radius,
                      "max_k": float(np.max(U_new[:, 3:])) if model.n_p else 0.0,
                      "accepted": accepted})
        if accepted:
            U, X, J = U_new, X_new, J_new
            lin = None
            if first_accepted_k is None:
                first_accepted_k = float(np.abs(U[:, 3:]).sum()) if model.n_p else 0.0
            if act_dec < cfg.tol_cost:
                converged = True
                break
        if ratio < tr.rho1:
            radius /= tr.shrink
        elif ratio > tr.rho2:
            radius *= tr.grow
        if radius < cfg.tol_radius:
            converged = True
            break

    final_k = float(np.abs(U[:, 3:]).sum()) if model.n_p else 0.0
    max_k = float(np.max(U[:, 3:])) if model.n_p and problem.N else 0.0
    return CitoSolution(U=U, X=X, cost=J, iterations=iterations,
                        converged=converged, max_terminal_stiffness=max_k,
                        trace=trace,
                        first_accepted_stiffness_sum=first_accepted_k or 0.0,
                        final_stiffness_sum=final_k)
