"""Pose optimisation for airway sensing with the isotropic covariance."""

from __future__ import annotations

from ..objectives import SensingEvaluator
from ..pattern import DEFAULT_PATTERN
from .position import optimize_positions
from .rotation import optimize_rotations
from .trace import OptTrace, SolverParams


def optimize_sensing_poses(layout, geom, grid, cfg, params: SolverParams = SolverParams(),
                           pattern=DEFAULT_PATTERN, power_ref_w: float | None = None,
                           positions: bool = True, rotations: bool = True):
    """Maximise the entropic soft-minimum of the received power along the airways.

    Runs the position phase and then the rotation phase.  Powers are measured
    in units of ``power_ref_w`` (default: the true minimum power of the
    starting layout), so the trace objective is dimensionless.
    """
    evaluator = SensingEvaluator(geom, grid, cfg, layout.num_arrays, pattern)
    if power_ref_w is None:
        power_ref_w = float(evaluator.powers(layout.frames()).min())
    evaluator.power_ref_w = power_ref_w
    trace = OptTrace()
    if positions:
        layout, trace = optimize_positions(layout, evaluator, params, trace)
    if rotations:
        layout, trace = optimize_rotations(layout, evaluator, params, trace)
    return layout, trace
