"""Linear-objective direction subproblems used by the Frank-Wolfe steps."""

from __future__ import annotations

import itertools

import numpy as np

from ..errors import Infeasible
from ..geometry import local_rotations


# -- position direction: max g.l  s.t.  a_j.l >= c_j,  |l|^2 <= 1 --------------


def _barrier_terms(x, A, c):
    """Slacks, gradient and Hessian of -sum log(slack) for the halfspaces and ball."""
    lin = A @ x - c
    ball = 1.0 - x @ x
    grad = -(A.T @ (1.0 / lin)) + 2.0 * x / ball
    hess = (A.T * (1.0 / lin ** 2)) @ A
    hess += 2.0 * np.eye(len(x)) / ball + 4.0 * np.outer(x, x) / ball ** 2
    return lin, ball, grad, hess


def _strictly_inside(x, A, c):
    return np.all(A @ x - c > 0) and x @ x < 1.0


def _newton_center(x, t, g, A, c, tol=1e-12, max_iter=100):
    """Minimise ``-t g.x + barrier(x)`` from a strictly feasible ``x``."""
    for _ in range(max_iter):
        _, _, bg, bh = _barrier_terms(x, A, c)
        grad = -t * g + bg
        try:
            step = -np.linalg.solve(bh, grad)
        except np.linalg.LinAlgError:
            step = -np.linalg.lstsq(bh, grad, rcond=None)[0]
        decrement = -grad @ step
        if decrement / 2 <= tol:
            break
        s = 1.0
        f0 = -t * g @ x - np.sum(np.log(A @ x - c)) - np.log(1 - x @ x)
        while True:
            xn = x + s * step
            if _strictly_inside(xn, A, c):
                fn = -t * g @ xn - np.sum(np.log(A @ xn - c)) - np.log(1 - xn @ xn)
                if fn <= f0 - 0.25 * s * decrement:
                    break
            s *= 0.5
            if s < 1e-14:
                return x
        x = xn
    return x


def _phase_one(A, c, max_outer=60):
    """Find a strictly feasible point by minimising a common constraint slack ``s``.

    Returns ``(x, s)``; ``s < 0`` means ``x`` is strictly feasible.
    """
    n = A.shape[1]
    # variables z = (x, s); constraints  a_j.x - c_j + s >= 0,  1 - |x|^2 + s >= 0
    x = np.zeros(n)
    s = max(np.max(c - A @ x, initial=-1.0), -1.0) + 1.0
    z = np.append(x, s)

    def slacks(z):
        x, s = z[:-1], z[-1]
        return A @ x - c + s, 1.0 - x @ x + s

    t = 1.0
    for _ in range(max_outer):
        for _ in range(100):
            lin, ball = slacks(z)
            x = z[:-1]
            g = np.zeros(n + 1)
            g[-1] = t
            g[:-1] += -(A.T @ (1 / lin)) + 2 * x / ball
            g[-1] += -np.sum(1 / lin) - 1 / ball
            Ah = np.hstack([A, np.ones((len(c), 1))])
            bvec = np.append(-2 * x, 1.0)
            H = (Ah.T * (1 / lin ** 2)) @ Ah + np.outer(bvec, bvec) / ball ** 2
            H[:-1, :-1] += 2 * np.eye(n) / ball
            step = -np.linalg.lstsq(H, g, rcond=None)[0]
            dec = -g @ step
            if dec / 2 <= 1e-12:
                break
            f0 = t * z[-1] - np.sum(np.log(lin)) - np.log(ball)
            a = 1.0
            while a > 1e-14:
                zn = z + a * step
                ln, bn = slacks(zn)
                if np.all(ln > 0) and bn > 0:
                    fn = t * zn[-1] - np.sum(np.log(ln)) - np.log(bn)
                    if fn <= f0 - 0.25 * a * dec:
                        break
                a *= 0.5
            else:
                break
            z = zn
            if z[-1] < -1e-3:
                return z[:-1], z[-1]
        if (len(c) + 1) / t < 1e-12:
            break
        t *= 10.0
    return z[:-1], z[-1]


def fw_direction_position(grad, l_prev, others, d_ratio: float, tol: float = 1e-8) -> np.ndarray:
    """Maximiser of ``grad . l`` over the linearised spacing constraints and unit ball.

    Constraints are ``2 (l_prev - l_j) . l >= d_ratio**2`` for every other
    array centre ``l_j`` and ``|l|^2 <= 1``.  Solved with a log-barrier Newton
    method (after a phase-one search for an interior point).
    """
    grad = np.asarray(grad, dtype=float)
    l_prev = np.asarray(l_prev, dtype=float)
    others = np.asarray(others, dtype=float).reshape(-1, 3)
    gnorm = np.linalg.norm(grad)
    if gnorm == 0.0:
        return l_prev.copy()
    g = grad / gnorm
    if len(others) == 0:
        return g.copy()
    A = 2.0 * (l_prev[None, :] - others)
    c = np.full(len(others), d_ratio ** 2)
    # the ball optimum is exact whenever it satisfies the halfspaces
    if np.all(A @ g - c >= 0):
        return g.copy()

    x0, s = _phase_one(A, c)
    if s >= 0:
        if s <= 1e-9 and np.all(A @ l_prev - c >= -1e-9):
            return l_prev.copy()  # feasible set has no interior
        raise Infeasible(f"linearised spacing constraints are empty (slack {s:.3g})")

    m = len(c) + 1
    t = 1.0
    x = x0
    while m / t > tol * 1e-3:
        x = _newton_center(x, t, g, A, c)
        t *= 20.0
    return x


# -- rotation direction: 2-D LP with box ---------------------------------------


def rotation_linearization(u_prev) -> tuple[np.ndarray, np.ndarray]:
    """Normal column ``b`` of ``R(u)`` and its Jacobian ``A`` w.r.t. (vartheta, varphi)."""
    vt, vp = (u_prev.vartheta, u_prev.varphi) if hasattr(u_prev, "vartheta") else u_prev
    cv, sv, cp, sp = np.cos(vt), np.sin(vt), np.cos(vp), np.sin(vp)
    b = np.array([cv * cp, cv * sp, sv])
    A = np.array([[-sv * cp, -cv * sp],
                  [-sv * sp, cv * cp],
                  [cv, 0.0]])
    return A, b


def rotation_direction_bounds(u_prev, trust_radius: float):
    """Box for the rotation increment: the trust region, with vartheta kept >= 0."""
    vt = u_prev[0]
    lo = np.array([max(-trust_radius, -vt), -trust_radius])
    hi = np.array([trust_radius, trust_radius])
    return lo, hi


def rotation_lp_constraints(u_prev, placement_frame, center_b, other_centers):
    """Rows ``G`` and bounds ``h`` of the linearised reflection constraints ``G du <= h``."""
    A, b = rotation_linearization(u_prev)
    other_centers = np.asarray(other_centers, dtype=float).reshape(-1, 3)
    # (l_j - l_b)^T R(t_b) (A du + b) <= 0
    w = (other_centers - center_b[None, :]) @ placement_frame
    return w @ A, -(w @ b)


def _lp_box_2d(c, G, h, lo, hi, feas_tol=1e-12):
    """Maximise ``c.x`` over ``{G x <= h, lo <= x <= hi}`` in two dimensions by
    enumerating vertices (pairwise intersections of all boundary lines)."""
    rows = [np.array([1.0, 0.0]), np.array([-1.0, 0.0]),
            np.array([0.0, 1.0]), np.array([0.0, -1.0])] + list(G)
    rhs = [hi[0], -lo[0], hi[1], -lo[1]] + list(h)
    rows, rhs = np.array(rows), np.array(rhs)
    scale = np.maximum(np.linalg.norm(rows, axis=1), 1e-300)
    best, best_val = None, -np.inf
    for i, j in itertools.combinations(range(len(rows)), 2):
        M = np.array([rows[i], rows[j]])
        if abs(np.linalg.det(M)) < 1e-14 * scale[i] * scale[j]:
            continue
        x = np.linalg.solve(M, [rhs[i], rhs[j]])
        if np.all(rows @ x - rhs <= feas_tol * np.maximum(1.0, np.abs(rhs)) * 10):
            val = c @ x
            if val > best_val + 1e-15 or (abs(val - best_val) <= 1e-15 and
                                          np.linalg.norm(x) < np.linalg.norm(best)):
                best, best_val = x, val
    return best


def fw_direction_rotation(grad, u_prev, placement_frame, center_b, other_centers,
                          trust_radius: float = 0.2) -> np.ndarray:
    """Rotation increment maximising ``grad . (u_prev + du)`` under the
    linearised reflection constraints and ``|du|_inf <= trust_radius``.

    ``placement_frame`` is ``R(t_b)``; centres are unit pointing vectors.
    ``du = 0`` is always feasible when ``u_prev`` satisfies the exact constraints.
    """
    grad = np.asarray(grad, dtype=float)
    u_prev = np.asarray(u_prev, dtype=float)
    if not np.any(grad):
        return np.zeros(2)
    G, h = rotation_lp_constraints(u_prev, placement_frame, np.asarray(center_b, float),
                                   other_centers)
    # guard against round-off at du = 0 when a constraint is exactly tight
    h = np.maximum(h, 0.0)
    lo, hi = rotation_direction_bounds(u_prev, trust_radius)
    du = _lp_box_2d(grad, G, h, lo, hi)
    if du is None or grad @ du <= 0:
        return np.zeros(2)
    return du


def normal_from_rotation(u) -> np.ndarray:
    return local_rotations(u[0], u[1])[:, 2]
