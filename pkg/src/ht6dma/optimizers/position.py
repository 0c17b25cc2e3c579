"""Alternating Frank-Wolfe optimisation of the array positions on the sphere."""

from __future__ import annotations

import numpy as np

from ..errors import Infeasible
from ..geometry import (NO_ROTATION, SLACK_TOL, ArrayPose, GlobalPlacement, SphereLayout,
                        direction_angles, frame_from_direction, global_rotations,
                        pointing_vectors)
from ..objectives import fd_gradient
from .subproblems import fw_direction_position
from .trace import OptTrace, SolverParams


def _distance_slacks(radius_m, d_min_m, l, b, candidate):
    others = np.delete(l, b, axis=0)
    if len(others) == 0:
        return np.inf
    return float(np.min(radius_m * np.linalg.norm(others - candidate, axis=1)) - d_min_m)


def _min_distance_slack(radius_m, d_min_m, l):
    if len(l) < 2:
        return np.inf
    d = np.linalg.norm(l[:, None] - l[None], axis=-1)
    d[np.diag_indices(len(l))] = np.inf
    return float(radius_m * d.min() - d_min_m)


def _layout_from(layout: SphereLayout, l) -> SphereLayout:
    theta, phi = direction_angles(l)
    poses = tuple(ArrayPose(GlobalPlacement(float(th), float(ph)), NO_ROTATION, p.array_id)
                  for th, ph, p in zip(np.atleast_1d(theta), np.atleast_1d(phi), layout.poses))
    return SphereLayout(layout.radius_m, layout.d_min_m, poses)


def optimize_positions(layout: SphereLayout, objective, params: SolverParams = SolverParams(),
                       trace: OptTrace | None = None,
                       callback=None) -> tuple[SphereLayout, OptTrace]:
    """Maximise ``objective`` over the array centres with local rotations reset to none.

    ``objective`` is an evaluator (see :mod:`ht6dma.objectives`) exposing
    ``__call__(centers, frames)`` and ``for_array(centers, frames, b)``.
    Off-sphere candidates are scored with the centre at ``R * l`` and the
    orientation frame of the direction ``l / |l|``.

    Args:
        callback: optional ``f(layout)`` called with the layout after every
            accepted step.
    """
    trace = OptTrace() if trace is None else trace
    R, d_min = layout.radius_m, layout.d_min_m
    d_ratio = d_min / R
    ang = layout.placement_angles()
    l = pointing_vectors(ang[:, 0], ang[:, 1])
    frames = global_rotations(ang[:, 0], ang[:, 1])
    B = len(l)

    slack0 = _min_distance_slack(R, d_min, l)
    if slack0 < -SLACK_TOL:
        raise Infeasible(f"initial layout violates the minimum spacing (slack {slack0:.3g} m)")

    value = objective(R * l, frames)
    trace.append("init", -1, float(value), 0.0, slack0)

    for _ in range(params.t_ou_l):
        for b in range(B):
            f_b = objective.for_array(R * l, frames, b)

            def relaxed(x):
                return f_b(R * x, frame_from_direction(x))

            others = np.delete(l, b, axis=0)
            cur = l[b].copy()
            cur_val = relaxed(cur)
            t = 1
            while t < params.t_in_l:
                g = fd_gradient(relaxed, cur, params.fd_step)
                target = fw_direction_position(g, cur, others, d_ratio)
                d = target - cur
                slope = float(g @ d)
                if not slope > 0:
                    break
                tau = params.tau_init
                accepted = False
                for _ in range(params.max_backtracks):
                    cand = cur + tau * d
                    if relaxed(cand) - cur_val >= params.ell * tau * slope:
                        new = cand / np.linalg.norm(cand)
                        new_val = relaxed(new)
                        if (new_val >= cur_val and
                                _distance_slacks(R, d_min, l, b, new) >= -SLACK_TOL):
                            accepted = True
                            break
                    tau *= params.delta
                if not accepted:
                    break
                change = new_val - cur_val
                cur, cur_val = new, new_val
                l[b] = cur
                frames[b] = frame_from_direction(cur)
                trace.append("position", b, float(cur_val), float(tau),
                             _min_distance_slack(R, d_min, l))
                if callback is not None:
                    callback(_layout_from(layout, l))
                t += 1
                if abs(change) <= params.eps_th:
                    break

    return _layout_from(layout, l), trace
