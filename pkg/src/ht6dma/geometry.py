"""Array poses on the BS sphere and the local-to-global coordinate transforms.

Each array is placed by the elevation/azimuth of its centre on a sphere of
radius ``R`` (the *placement*) and tilted inside its own local spherical frame
(the *rotation*).  Rotation matrices follow the right-handed convention

    R_y(a) = [[cos a, 0, sin a], [0, 1, 0], [-sin a, 0, cos a]]
    R_z(a) = [[cos a, -sin a, 0], [sin a, cos a, 0], [0, 0, 1]]

and an antenna at local coordinate ``r_l`` lands at
``R * l(t) + R(t) @ R(u) @ r_l`` in the global frame.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NonUnitInput

HALF_PI = np.pi / 2

ORTHO_TOL = 1e-10
SLACK_TOL = 1e-9
UNIT_TOL = 1e-8

LOCAL_NORMAL = np.array([0.0, 0.0, 1.0])


def wrap_angle(a):
    """Wrap an angle (or array of angles) into [-pi, pi]."""
    w = np.mod(np.asarray(a, dtype=float) + np.pi, 2 * np.pi) - np.pi
    # keep +pi instead of mapping it to -pi so that axis cases round-trip
    w = np.where((w <= -np.pi + 1e-15) & (np.asarray(a) > 0), np.pi, w)
    return float(w) if np.ndim(w) == 0 else w


@dataclass(frozen=True)
class GlobalPlacement:
    """Elevation ``theta`` and azimuth ``phi`` of an array centre (radians)."""

    theta: float
    phi: float

    def __post_init__(self):
        if not (-HALF_PI - 1e-12 <= self.theta <= HALF_PI + 1e-12):
            raise ValueError(f"theta={self.theta} outside [-pi/2, pi/2]")
        if not (-np.pi - 1e-12 <= self.phi <= np.pi + 1e-12):
            raise ValueError(f"phi={self.phi} outside [-pi, pi]")


@dataclass(frozen=True)
class LocalRotation:
    """Elevation ``vartheta`` and azimuth ``varphi`` of the rotated normal
    in the array's local frame.  ``(pi/2, 0)`` means no rotation."""

    vartheta: float = HALF_PI
    varphi: float = 0.0

    def __post_init__(self):
        if not (-1e-12 <= self.vartheta <= HALF_PI + 1e-12):
            raise ValueError(f"vartheta={self.vartheta} outside [0, pi/2]")
        if not (-np.pi - 1e-12 <= self.varphi <= np.pi + 1e-12):
            raise ValueError(f"varphi={self.varphi} outside [-pi, pi]")


NO_ROTATION = LocalRotation(HALF_PI, 0.0)


@dataclass(frozen=True)
class ArrayPose:
    placement: GlobalPlacement
    rotation: LocalRotation = NO_ROTATION
    array_id: int = 0


@dataclass(frozen=True)
class SphereLayout:
    """Full BS configuration: sphere radius, minimum spacing and all poses."""

    radius_m: float
    d_min_m: float
    poses: tuple[ArrayPose, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "poses", tuple(self.poses))
        if self.radius_m <= 0:
            raise ValueError("radius_m must be positive")
        if self.d_min_m < 0:
            raise ValueError("d_min_m must be non-negative")
        if len(self.poses) < 1:
            raise ValueError("a layout needs at least one array")
        ids = [p.array_id for p in self.poses]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate array ids in layout: {ids}")

    @property
    def num_arrays(self) -> int:
        return len(self.poses)

    def placement_angles(self) -> np.ndarray:
        """(B, 2) array of ``[theta, phi]`` per array."""
        return np.array([[p.placement.theta, p.placement.phi] for p in self.poses])

    def rotation_angles(self) -> np.ndarray:
        """(B, 2) array of ``[vartheta, varphi]`` per array."""
        return np.array([[p.rotation.vartheta, p.rotation.varphi] for p in self.poses])

    def centers_unit(self) -> np.ndarray:
        """(B, 3) unit pointing vectors of the array centres."""
        a = self.placement_angles()
        return pointing_vectors(a[:, 0], a[:, 1])

    def frames(self) -> np.ndarray:
        """(B, 3, 3) combined rotations ``R(t_b) @ R(u_b)``."""
        t = self.placement_angles()
        u = self.rotation_angles()
        return global_rotations(t[:, 0], t[:, 1]) @ local_rotations(u[:, 0], u[:, 1])

    def with_pose(self, index: int, pose: ArrayPose) -> "SphereLayout":
        poses = list(self.poses)
        poses[index] = pose
        return SphereLayout(self.radius_m, self.d_min_m, tuple(poses))

    @classmethod
    def from_angles(cls, radius_m, d_min_m, placements, rotations=None):
        """Build a layout from (B, 2) placement angles and optional rotation angles."""
        placements = np.asarray(placements, dtype=float).reshape(-1, 2)
        if rotations is None:
            rotations = np.tile([HALF_PI, 0.0], (len(placements), 1))
        rotations = np.asarray(rotations, dtype=float).reshape(-1, 2)
        poses = tuple(
            ArrayPose(GlobalPlacement(float(t[0]), float(t[1])),
                      LocalRotation(float(u[0]), float(u[1])), b)
            for b, (t, u) in enumerate(zip(placements, rotations))
        )
        return cls(float(radius_m), float(d_min_m), poses)


# -- batched primitives ------------------------------------------------------


def rot_y(a):
    """Rotation(s) about the y-axis; ``a`` may be a scalar or 1-D array."""
    a = np.asarray(a, dtype=float)
    c, s = np.cos(a), np.sin(a)
    o, z = np.ones_like(a), np.zeros_like(a)
    m = np.stack([np.stack([c, z, s], -1), np.stack([z, o, z], -1),
                  np.stack([-s, z, c], -1)], -2)
    return m


def rot_z(a):
    """Rotation(s) about the z-axis; ``a`` may be a scalar or 1-D array."""
    a = np.asarray(a, dtype=float)
    c, s = np.cos(a), np.sin(a)
    o, z = np.ones_like(a), np.zeros_like(a)
    m = np.stack([np.stack([c, -s, z], -1), np.stack([s, c, z], -1),
                  np.stack([z, z, o], -1)], -2)
    return m


def pointing_vectors(theta, phi) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    ct = np.cos(theta)
    return np.stack([ct * np.cos(phi), ct * np.sin(phi), np.sin(theta)], -1)


def direction_angles(v) -> tuple[np.ndarray, np.ndarray]:
    """Elevation/azimuth of (batched) vectors; no unit-norm check.

    The azimuth of a vector on the z-axis is 0 by convention.
    """
    v = np.asarray(v, dtype=float)
    x, y, z = v[..., 0], v[..., 1], v[..., 2]
    rho = np.hypot(x, y)
    theta = np.arctan2(z, rho)
    phi = np.where(rho > 0, np.arctan2(y, x), 0.0)
    return theta, phi


def local_rotations(vartheta, varphi) -> np.ndarray:
    return rot_z(varphi) @ rot_y(HALF_PI - np.asarray(vartheta, dtype=float))


def global_rotations(theta, phi) -> np.ndarray:
    return rot_z(phi) @ rot_y(HALF_PI - np.asarray(theta, dtype=float))


def frame_from_direction(l, rotation_angles=(HALF_PI, 0.0)) -> np.ndarray:
    """Orientation frame ``R(t) @ R(u)`` for an array whose centre lies along
    ``l`` (any non-zero length); used to evaluate relaxed interior positions."""
    theta, phi = direction_angles(l)
    return global_rotations(theta, phi) @ local_rotations(*rotation_angles)


# -- single-pose operations --------------------------------------------------


def pointing_vector(p: GlobalPlacement) -> np.ndarray:
    """Unit vector ``[cos t cos p, cos t sin p, sin t]`` towards the array centre."""
    return pointing_vectors(p.theta, p.phi)


def angles_of(v) -> GlobalPlacement:
    """Inverse of :func:`pointing_vector`."""
    v = np.asarray(v, dtype=float)
    if abs(np.linalg.norm(v) - 1.0) > UNIT_TOL:
        raise NonUnitInput(f"expected a unit vector, got norm {np.linalg.norm(v)!r}")
    theta, phi = direction_angles(v)
    return GlobalPlacement(float(theta), float(phi))


def local_rotation(u: LocalRotation) -> np.ndarray:
    return local_rotations(u.vartheta, u.varphi)


def global_rotation(t: GlobalPlacement) -> np.ndarray:
    return global_rotations(t.theta, t.phi)


def pose_frame(pose: ArrayPose) -> np.ndarray:
    return global_rotation(pose.placement) @ local_rotation(pose.rotation)


def antenna_positions_global(pose: ArrayPose, local_coords, radius_m: float) -> np.ndarray:
    """Global antenna coordinates of one array, shape (N, 3)."""
    local_coords = np.atleast_2d(np.asarray(local_coords, dtype=float))
    center = radius_m * pointing_vector(pose.placement)
    return center + local_coords @ pose_frame(pose).T


def outward_normal(pose: ArrayPose) -> np.ndarray:
    return pose_frame(pose) @ LOCAL_NORMAL


# -- constraints -------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    """One violated pairwise constraint.

    ``slack`` is signed so that a negative value means violation: for
    ``distance`` it is ``R*|l_i - l_j| - d_min``, for ``reflection`` it is
    ``-n_i . (l_j - l_i)`` and for ``blockage`` it is ``n_i . l_i``.
    """

    kind: str
    i: int
    j: int
    slack: float


@dataclass(frozen=True)
class FeasibilityReport:
    violations: tuple[Violation, ...]
    min_distance_slack: float
    min_reflection_slack: float

    @property
    def ok(self) -> bool:
        return not self.violations


def constraint_slacks(radius_m, d_min_m, centers_unit, normals):
    """Pairwise distance and reflection slacks as (B, B) arrays.

    Diagonal entries are +inf.  ``centers_unit`` and ``normals`` are (B, 3).
    """
    l = np.asarray(centers_unit, dtype=float)
    n = np.asarray(normals, dtype=float)
    diff = l[None, :, :] - l[:, None, :]  # diff[i, j] = l_j - l_i
    dist = radius_m * np.linalg.norm(diff, axis=-1) - d_min_m
    refl = -np.einsum("ik,ijk->ij", n, diff)
    np.fill_diagonal(dist, np.inf)
    np.fill_diagonal(refl, np.inf)
    return dist, refl


def layout_feasible(layout: SphereLayout, tol: float = SLACK_TOL) -> FeasibilityReport:
    """Check minimum-distance, reflection and blockage constraints of a layout."""
    l = layout.centers_unit()
    n = layout.frames() @ LOCAL_NORMAL
    dist, refl = constraint_slacks(layout.radius_m, layout.d_min_m, l, n)
    ids = [p.array_id for p in layout.poses]
    violations = []
    B = len(ids)
    for i in range(B):
        for j in range(i + 1, B):
            if dist[i, j] < -tol:
                violations.append(Violation("distance", ids[i], ids[j], float(dist[i, j])))
    for i in range(B):
        for j in range(B):
            if i != j and refl[i, j] < -tol:
                violations.append(Violation("reflection", ids[i], ids[j], float(refl[i, j])))
    blockage = np.einsum("ik,ik->i", n, l)
    for i in range(B):
        if blockage[i] < -tol:
            violations.append(Violation("blockage", ids[i], ids[i], float(blockage[i])))
    return FeasibilityReport(
        tuple(violations),
        float(dist.min()) if B > 1 else float("inf"),
        float(refl.min()) if B > 1 else float("inf"),
    )
