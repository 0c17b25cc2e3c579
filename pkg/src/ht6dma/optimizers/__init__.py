from .covariance import CovarianceResult, optimize_covariance, solve_maxmin_sdp
from .position import optimize_positions
from .rotation import canonical_rotation, optimize_rotations
from .sensing import optimize_sensing_poses
from .subproblems import (fw_direction_position, fw_direction_rotation,
                          rotation_linearization)
from .trace import OptTrace, SolverParams, TraceRecord

__all__ = [
    "CovarianceResult", "OptTrace", "SolverParams", "TraceRecord", "canonical_rotation",
    "fw_direction_position", "fw_direction_rotation", "optimize_covariance",
    "optimize_positions", "optimize_rotations", "optimize_sensing_poses",
    "rotation_linearization", "solve_maxmin_sdp",
]
