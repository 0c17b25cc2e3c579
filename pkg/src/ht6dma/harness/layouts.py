"""Baseline array layouts: the fixed three-sector array and the Fibonacci lattice."""

from __future__ import annotations

import numpy as np

from ..channel import ArrayGeometry
from ..errors import Infeasible
from ..geometry import SphereLayout, direction_angles, layout_feasible

FPA_TILT_RAD = 5 * np.pi / 12
GOLDEN_ANGLE = np.pi * (3.0 - np.sqrt(5.0))


def fpa_layout(total_antennas: int, radius_m: float, wavelength_m: float,
               d_min_m: float = 0.0) -> tuple[SphereLayout, ArrayGeometry]:
    """Three equatorial sector arrays, each with ``total_antennas // 3`` elements."""
    if total_antennas < 3:
        raise ValueError("the sector layout needs at least 3 antennas")
    phis = np.array([-2 * np.pi / 3, 0.0, 2 * np.pi / 3])
    placements = np.stack([np.zeros(3), phis], axis=1)
    rotations = np.tile([FPA_TILT_RAD, 0.0], (3, 1))
    layout = SphereLayout.from_angles(radius_m, d_min_m, placements, rotations)
    return layout, ArrayGeometry.upa(total_antennas // 3, wavelength_m)


def fibonacci_directions(n: int) -> np.ndarray:
    """``n`` unit vectors on the offset Fibonacci lattice, shape (n, 3)."""
    i = np.arange(n)
    z = 1.0 - (2.0 * i + 1.0) / n
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    ang = i * GOLDEN_ANGLE
    return np.stack([r * np.cos(ang), r * np.sin(ang), z], axis=1)


def uniform_sphere_layout(num_arrays: int, radius_m: float, d_min_m: float) -> SphereLayout:
    """Fibonacci-lattice placement with every local rotation at ``(pi/2, 0)``.

    Raises:
        Infeasible: if two lattice points are closer than ``d_min_m``.
    """
    if num_arrays < 1:
        raise ValueError("num_arrays must be >= 1")
    theta, phi = direction_angles(fibonacci_directions(num_arrays))
    layout = SphereLayout.from_angles(radius_m, d_min_m, np.stack([theta, phi], axis=1))
    report = layout_feasible(layout)
    if not report.ok:
        raise Infeasible(f"{num_arrays} lattice points cannot keep {d_min_m} m spacing "
                         f"(worst slack {report.min_distance_slack:.3g} m)")
    return layout
