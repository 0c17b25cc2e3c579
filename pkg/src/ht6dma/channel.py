"""Line-of-sight channels between the BS arrays and far-field users or airway points."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UserInsideSphere
from .geometry import (ArrayPose, SphereLayout, antenna_positions_global,
                       pointing_vectors)
from .pattern import DEFAULT_PATTERN, PatternParams, gains_linear

SPEED_OF_LIGHT = 299_792_458.0


def most_square_grid(n: int) -> tuple[int, int]:
    """Factor ``n`` into ``(rows, cols)`` with rows <= cols and rows maximal."""
    rows = max(r for r in range(1, int(np.sqrt(n)) + 1) if n % r == 0)
    return rows, n // rows


@dataclass(frozen=True)
class ArrayGeometry:
    """Antenna layout of one (unrotated) array, shared by every array of a BS."""

    local_coords: np.ndarray
    wavelength_m: float

    def __post_init__(self):
        coords = np.atleast_2d(np.asarray(self.local_coords, dtype=float))
        if coords.shape[1] != 3:
            raise ValueError("local_coords must be (N, 3)")
        if not np.allclose(coords.mean(axis=0), 0.0, atol=1e-12):
            raise ValueError("local_coords must be centred on the array origin")
        if self.wavelength_m <= 0:
            raise ValueError("wavelength must be positive")
        object.__setattr__(self, "local_coords", coords)

    @property
    def antennas_per_array(self) -> int:
        return self.local_coords.shape[0]

    @classmethod
    def upa(cls, n: int, wavelength_m: float, spacing_wavelengths: float = 0.5):
        """Centred ``rows x cols`` planar array in the local x-y plane.

        Rows run along local x and columns along local y.
        """
        rows, cols = most_square_grid(n)
        d = spacing_wavelengths * wavelength_m
        xs = (np.arange(rows) - (rows - 1) / 2) * d
        ys = (np.arange(cols) - (cols - 1) / 2) * d
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        coords = np.stack([gx.ravel(), gy.ravel(), np.zeros(n)], axis=-1)
        return cls(coords, float(wavelength_m))


def wavelength_for(carrier_hz: float) -> float:
    return SPEED_OF_LIGHT / carrier_hz


@dataclass(frozen=True)
class PathLossParams:
    """Path gain ``eps0 * d**-exponent``."""

    eps0: float
    exponent: float = 2.0

    def __post_init__(self):
        if self.eps0 <= 0:
            raise ValueError("eps0 must be positive")
        if self.exponent < 1:
            raise ValueError("path-loss exponent must be >= 1")

    @classmethod
    def free_space(cls, wavelength_m: float, exponent: float = 2.0):
        return cls((wavelength_m / (4 * np.pi)) ** 2, exponent)

    def gain(self, distance_m):
        return self.eps0 * np.asarray(distance_m, dtype=float) ** (-self.exponent)


@dataclass(frozen=True)
class ChannelVector:
    entries: np.ndarray  # (N*B,) complex, array-major
    path_gain: float


# -- batched core ------------------------------------------------------------


def antenna_positions(centers, frames, local_coords) -> np.ndarray:
    """(B, N, 3) global antenna positions for centres (B, 3) and frames (B, 3, 3)."""
    return centers[:, None, :] + np.einsum("bkm,nm->bnk", frames, local_coords)


def channel_tensor(centers, frames, geom: ArrayGeometry, dirs, path_gains,
                   pattern: PatternParams = DEFAULT_PATTERN) -> np.ndarray:
    """Channels for a batch of directions, shape (..., B, N).

    ``dirs`` (..., 3) unit directions, ``path_gains`` (...) linear.  Rows with
    zero path gain yield all-zero channels (used to pad user drops).
    """
    pos = antenna_positions(centers, frames, geom.local_coords)
    k = 2 * np.pi / geom.wavelength_m
    phase = np.exp(-1j * k * np.einsum("...k,bnk->...bn", dirs, pos))
    amp = np.sqrt(np.asarray(path_gains)[..., None] * gains_linear(frames, dirs, pattern))
    return amp[..., None] * phase


# -- public single-link operations --------------------------------------------


def steering_vector(pose: ArrayPose, f, geom: ArrayGeometry, radius_m: float) -> np.ndarray:
    """Per-antenna unit-modulus phases of one array towards direction ``f``."""
    pos = antenna_positions_global(pose, geom.local_coords, radius_m)
    return np.exp(-1j * 2 * np.pi / geom.wavelength_m * (pos @ np.asarray(f, dtype=float)))


def _layout_arrays(layout: SphereLayout):
    return layout.radius_m * layout.centers_unit(), layout.frames()


def comm_channel(layout: SphereLayout, geom: ArrayGeometry, user_pos, pl: PathLossParams,
                 pattern: PatternParams = DEFAULT_PATTERN) -> ChannelVector:
    """Stacked channel from a user at ``user_pos`` (metres) to all arrays."""
    user_pos = np.asarray(user_pos, dtype=float)
    d = float(np.linalg.norm(user_pos))
    if d <= layout.radius_m:
        raise UserInsideSphere(f"user at distance {d} m is inside the BS sphere")
    centers, frames = _layout_arrays(layout)
    nu = float(pl.gain(d))
    h = channel_tensor(centers, frames, geom, user_pos / d, nu, pattern)
    return ChannelVector(h.reshape(-1), nu)


def sensing_channel(layout: SphereLayout, geom: ArrayGeometry, point_angles, distance_m: float,
                    pl: PathLossParams, pattern: PatternParams = DEFAULT_PATTERN) -> ChannelVector:
    """Stacked channel towards an airway point given by ``(theta, phi)`` and range."""
    if distance_m <= layout.radius_m:
        raise UserInsideSphere(f"point at distance {distance_m} m is inside the BS sphere")
    theta, phi = point_angles
    f = pointing_vectors(theta, phi)
    centers, frames = _layout_arrays(layout)
    nu = float(pl.gain(distance_m))
    h = channel_tensor(centers, frames, geom, f, nu, pattern)
    return ChannelVector(h.reshape(-1), nu)
