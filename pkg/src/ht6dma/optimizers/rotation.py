"""Alternating Frank-Wolfe optimisation of the local array rotations."""

from __future__ import annotations

import numpy as np

from ..geometry import (HALF_PI, LOCAL_NORMAL, SLACK_TOL, ArrayPose, LocalRotation,
                        SphereLayout, global_rotations, local_rotations,
                        pointing_vectors, wrap_angle)
from ..objectives import fd_gradient
from .subproblems import fw_direction_rotation
from .trace import OptTrace, SolverParams


def canonical_rotation(u) -> np.ndarray:
    """Map ``(vartheta, varphi)`` into ``[0, pi/2] x [-pi, pi]``.

    A tilt past the local pole (``vartheta > pi/2``) equals the tilt
    ``(pi - vartheta, varphi + pi)`` combined with a half-turn of the array
    about its normal, which leaves a centred rectangular array unchanged.
    """
    vt, vp = float(u[0]), float(u[1])
    if vt > HALF_PI:
        vt, vp = np.pi - vt, vp + np.pi
    return np.array([vt, wrap_angle(vp)])


def reflection_slacks(normal_b, center_b, other_centers) -> np.ndarray:
    """``-n_b . (l_j - l_b)`` for every other centre; negative means violation."""
    return -(np.asarray(other_centers) - center_b) @ normal_b


def _min_reflection_slack(l, normals):
    B = len(l)
    if B < 2:
        return np.inf
    diff = l[None, :, :] - l[:, None, :]
    s = -np.einsum("ik,ijk->ij", normals, diff)
    s[np.diag_indices(B)] = np.inf
    return float(s.min())


def optimize_rotations(layout: SphereLayout, objective, params: SolverParams = SolverParams(),
                       trace: OptTrace | None = None,
                       callback=None) -> tuple[SphereLayout, OptTrace]:
    """Maximise ``objective`` over the local rotations with positions fixed.

    Args:
        callback: optional ``f(layout)`` called with the layout after every
            accepted step.
    """
    trace = OptTrace() if trace is None else trace
    R = layout.radius_m
    t_ang = layout.placement_angles()
    u = layout.rotation_angles().copy()
    l = pointing_vectors(t_ang[:, 0], t_ang[:, 1])
    Rt = global_rotations(t_ang[:, 0], t_ang[:, 1])
    frames = Rt @ local_rotations(u[:, 0], u[:, 1])
    B = len(l)

    value = objective(R * l, frames)
    if not trace.records:
        trace.append("init", -1, float(value), 0.0,
                     _min_reflection_slack(l, frames @ LOCAL_NORMAL))

    for _ in range(params.t_ou_u):
        for b in range(B):
            f_b = objective.for_array(R * l, frames, b)
            center = R * l[b]

            def F(x):
                return f_b(center, Rt[b] @ local_rotations(x[0], x[1]))

            others = np.delete(l, b, axis=0)
            cur = u[b].copy()
            cur_val = F(cur)
            t = 1
            while t < params.t_in_u:
                g = fd_gradient(F, cur, params.fd_step)
                du = fw_direction_rotation(g, cur, Rt[b], l[b], others, params.trust_radius_rad)
                slope = float(g @ du)
                if not slope > 0:
                    break
                tau = params.tau_init
                accepted = False
                for _ in range(params.max_backtracks):
                    cand = canonical_rotation(cur + tau * du)
                    normal = Rt[b] @ local_rotations(cand[0], cand[1])[:, 2]
                    feasible = (0.0 <= cand[0] <= HALF_PI and
                                np.all(reflection_slacks(normal, l[b], others) >= -SLACK_TOL))
                    if feasible:
                        cand_val = F(cand)
                        if cand_val - cur_val >= params.ell * tau * slope:
                            accepted = True
                            break
                    tau *= params.delta
                if not accepted:
                    break
                change = cand_val - cur_val
                cur, cur_val = cand, cand_val
                u[b] = cur
                frames[b] = Rt[b] @ local_rotations(cur[0], cur[1])
                trace.append("rotation", b, float(cur_val), float(tau),
                             _min_reflection_slack(l, frames @ LOCAL_NORMAL))
                if callback is not None:
                    callback(_layout_from(layout, u))
                t += 1
                if abs(change) <= params.eps_th:
                    break

    return _layout_from(layout, u), trace


def _layout_from(layout: SphereLayout, u) -> SphereLayout:
    poses = tuple(ArrayPose(p.placement, LocalRotation(float(min(max(v[0], 0.0), HALF_PI)),
                                                       float(v[1])), p.array_id)
                  for p, v in zip(layout.poses, u))
    return SphereLayout(layout.radius_m, layout.d_min_m, poses)
