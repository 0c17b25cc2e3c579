"""3GPP-style directional element pattern and per-array effective gain."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import ArrayPose, pose_frame


@dataclass(frozen=True)
class PatternParams:
    """Element pattern parameters; beamwidths in radians, levels in dB."""

    phi_3db: float = np.deg2rad(65.0)
    theta_3db: float = np.deg2rad(65.0)
    g_s_db: float = 30.0
    g_v_db: float = 30.0
    g_max_dbi: float = 8.0
    # "boresight": deviation angles measured from the local z-axis (normal).
    # "literal": elevation/azimuth of the local direction fed in as-is.
    convention: str = "boresight"

    def __post_init__(self):
        if self.phi_3db <= 0 or self.theta_3db <= 0:
            raise ValueError("beamwidths must be positive")
        if self.g_s_db <= 0 or self.g_v_db <= 0:
            raise ValueError("g_s_db and g_v_db must be positive")
        if self.convention not in ("boresight", "literal"):
            raise ValueError(f"unknown pattern convention {self.convention!r}")

    @classmethod
    def from_degrees(cls, phi_3db_deg=65.0, theta_3db_deg=65.0, g_s_db=30.0,
                     g_v_db=30.0, g_max_dbi=8.0, convention="boresight"):
        return cls(float(np.deg2rad(phi_3db_deg)), float(np.deg2rad(theta_3db_deg)),
                   g_s_db, g_v_db, g_max_dbi, convention)


DEFAULT_PATTERN = PatternParams()


def directional_gain_db(theta_dev, phi_dev, p: PatternParams = DEFAULT_PATTERN):
    """Element gain in dBi for vertical/horizontal deviation angles (radians)."""
    theta_dev = np.asarray(theta_dev, dtype=float)
    phi_dev = np.asarray(phi_dev, dtype=float)
    a_h = -np.minimum(12.0 * (phi_dev / p.phi_3db) ** 2, p.g_s_db)
    a_v = -np.minimum(12.0 * (theta_dev / p.theta_3db) ** 2, p.g_v_db)
    return p.g_max_dbi - np.minimum(-(a_h + a_v), p.g_s_db)


def deviation_angles(local_dirs, convention: str = "boresight"):
    """Map local unit directions (..., 3) to the (theta, phi) fed to the pattern."""
    x, y, z = local_dirs[..., 0], local_dirs[..., 1], local_dirs[..., 2]
    if convention == "boresight":
        return np.arcsin(np.clip(y, -1.0, 1.0)), np.arctan2(x, z)
    return np.arcsin(np.clip(z, -1.0, 1.0)), np.arctan2(y, x)


def gains_linear(frames, dirs, p: PatternParams = DEFAULT_PATTERN) -> np.ndarray:
    """Linear element gains for every (direction, array) pair.

    ``frames`` is (B, 3, 3) with columns the local axes in global coordinates;
    ``dirs`` is (..., 3) of unit directions.  Returns (..., B).
    """
    local = np.einsum("...k,bkm->...bm", dirs, frames)
    th, ph = deviation_angles(local, p.convention)
    return 10.0 ** (directional_gain_db(th, ph, p) / 10.0)


def local_direction(pose: ArrayPose, f) -> np.ndarray:
    """Express global direction ``f`` in the array's local frame."""
    return pose_frame(pose).T @ np.asarray(f, dtype=float)


def effective_gain_linear(pose: ArrayPose, f, p: PatternParams = DEFAULT_PATTERN) -> float:
    th, ph = deviation_angles(local_direction(pose, f), p.convention)
    return float(10.0 ** (directional_gain_db(th, ph, p) / 10.0))
