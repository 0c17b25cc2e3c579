"""Sum-rate and sensing objectives, the entropic soft-minimum and FD gradients.

Besides the layout-level functions, this module provides two evaluator
classes used by the optimizers.  They work on raw ``centers`` (B, 3) in metres
and ``frames`` (B, 3, 3) so that relaxed (off-sphere) array positions can be
scored, and they cache the contribution of every array but one so that the
per-array alternating loops only recompute what changes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ArrayGeometry, PathLossParams, channel_tensor
from .errors import NumericalFailure
from .geometry import SphereLayout
from .pattern import DEFAULT_PATTERN, PatternParams, gains_linear
from .scenario import AirwayGrid, UserDrop

LOG2E = 1.0 / np.log(2.0)


@dataclass(frozen=True)
class CommObjectiveCfg:
    tx_power_w: float
    noise_power_w: float
    num_samples: int
    pathloss: PathLossParams

    def __post_init__(self):
        if self.tx_power_w <= 0 or self.noise_power_w <= 0:
            raise ValueError("powers must be positive")
        if self.num_samples < 1:
            raise ValueError("num_samples must be >= 1")

    @property
    def snr(self) -> float:
        return self.tx_power_w / self.noise_power_w


@dataclass(frozen=True)
class SensingObjectiveCfg:
    power_budget_w: float
    beta: float
    pathloss: PathLossParams

    def __post_init__(self):
        if self.power_budget_w <= 0 or self.beta <= 0:
            raise ValueError("power_budget_w and beta must be positive")


def _layout_arrays(layout: SphereLayout):
    return layout.radius_m * layout.centers_unit(), layout.frames()


def _logdet_gram(gram) -> np.ndarray:
    """log2 det of (batched) Hermitian positive-definite matrices."""
    try:
        chol = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure("rate Gram matrix is not positive definite") from exc
    diag = np.real(np.diagonal(chol, axis1=-2, axis2=-1))
    return 2.0 * LOG2E * np.log(diag).sum(axis=-1)


def rate_from_channels(H, snr: float) -> float:
    """``log2 det(I + snr H H^H)`` for one channel matrix H of shape (NB, K)."""
    nb, k = H.shape
    if k == 0:
        return 0.0
    if k < nb:
        gram = np.eye(k) + snr * (H.conj().T @ H)
    else:
        gram = np.eye(nb) + snr * (H @ H.conj().T)
    return float(_logdet_gram(gram))


def sum_rate(layout: SphereLayout, geom: ArrayGeometry, drop: UserDrop, cfg: CommObjectiveCfg,
             pattern: PatternParams = DEFAULT_PATTERN) -> float:
    """Uplink MAC sum rate (bits/s/Hz) of one user drop."""
    if drop.num_users == 0:
        return 0.0
    centers, frames = _layout_arrays(layout)
    h = channel_tensor(centers, frames, geom, drop.directions,
                       cfg.pathloss.gain(drop.distances), pattern)
    return rate_from_channels(h.reshape(drop.num_users, -1).T, cfg.snr)


def mc_avg_rate(layout: SphereLayout, geom: ArrayGeometry, drops, cfg: CommObjectiveCfg,
                pattern: PatternParams = DEFAULT_PATTERN) -> float:
    """Sample-average sum rate over a frozen list of drops."""
    rates = [sum_rate(layout, geom, d, cfg, pattern) for d in drops]
    return float(np.mean(rates))


def received_power(layout: SphereLayout, geom: ArrayGeometry, R_d, point,
                   cfg: SensingObjectiveCfg, pattern: PatternParams = DEFAULT_PATTERN) -> float:
    """Power ``h^T R_d h*`` received at an airway point (anything with
    ``theta``, ``phi`` and ``distance_m`` attributes)."""
    grid = AirwayGrid(np.zeros(1), np.array([point.theta]), np.array([point.phi]),
                      np.array([point.distance_m]))
    return float(grid_powers(layout, geom, R_d, grid, cfg, pattern)[0])


def grid_channels(layout: SphereLayout, geom: ArrayGeometry, grid: AirwayGrid,
                  cfg: SensingObjectiveCfg, pattern: PatternParams = DEFAULT_PATTERN):
    """(D, NB) sensing channels for every grid point."""
    centers, frames = _layout_arrays(layout)
    h = channel_tensor(centers, frames, geom, grid.directions,
                       cfg.pathloss.gain(grid.distance_m), pattern)
    return h.reshape(len(grid), -1)


def powers_from_channels(Hs, R_d) -> np.ndarray:
    """``h^T R h*`` for each row ``h`` of ``Hs``."""
    vals = np.einsum("di,ij,dj->d", Hs, np.asarray(R_d), Hs.conj())
    return np.real(vals)


def grid_powers(layout, geom, R_d, grid, cfg, pattern=DEFAULT_PATTERN) -> np.ndarray:
    return powers_from_channels(grid_channels(layout, geom, grid, cfg, pattern), R_d)


def min_power(layout: SphereLayout, geom: ArrayGeometry, R_d, grids, cfg: SensingObjectiveCfg,
              pattern: PatternParams = DEFAULT_PATTERN) -> float:
    """Minimum received power over the union of airway grids."""
    if isinstance(grids, AirwayGrid):
        grids = [grids]
    return float(min(grid_powers(layout, geom, R_d, g, cfg, pattern).min() for g in grids))


def isotropic_covariance(total_antennas: int, power_budget_w: float) -> np.ndarray:
    return (power_budget_w / total_antennas) * np.eye(total_antennas, dtype=complex)


def entropic_surrogate(values, beta: float) -> float:
    """Smooth lower bound ``-(1/beta) ln sum exp(-beta f)`` of ``min(values)``."""
    v = np.asarray(values, dtype=float).ravel()
    m = v.min()
    # computing the shift from the min keeps every exponent <= 0
    s = np.exp(-beta * (v - m)).sum()
    return float(m - np.log(s) / beta)


def fd_gradient(objective, x, h: float = 1e-5) -> np.ndarray:
    """Central-difference gradient of a scalar function of a real vector."""
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e.flat[i] = h
        g.flat[i] = (objective(x + e) - objective(x - e)) / (2 * h)
    return g


# -- evaluators used by the optimizers -----------------------------------------


class CommEvaluator:
    """Monte-Carlo average sum rate on a frozen drop set.

    Drops are zero-padded to the largest user count; padded users have zero
    channels and leave the determinant unchanged.
    """

    def __init__(self, geom: ArrayGeometry, drops, cfg: CommObjectiveCfg,
                 pattern: PatternParams = DEFAULT_PATTERN):
        self.geom = geom
        self.cfg = cfg
        self.pattern = pattern
        self.num_drops = len(drops)
        kmax = max((d.num_users for d in drops), default=0)
        self.kmax = kmax
        dirs = np.zeros((len(drops), kmax, 3))
        dirs[..., 2] = 1.0
        nu = np.zeros((len(drops), kmax))
        for s, d in enumerate(drops):
            if d.num_users:
                dirs[s, :d.num_users] = d.directions
                nu[s, :d.num_users] = cfg.pathloss.gain(d.distances)
        self.dirs, self.nu = dirs, nu

    def block_grams(self, centers, frames) -> np.ndarray:
        """Per-array Gram contributions ``H_b^H H_b``, shape (B, S, K, K)."""
        h = channel_tensor(centers, frames, self.geom, self.dirs, self.nu, self.pattern)
        return np.einsum("skbn,sjbn->bskj", h.conj(), h)

    def value_from_gram(self, gram_sum) -> float:
        if self.kmax == 0:
            return 0.0
        gram = np.eye(self.kmax) + self.cfg.snr * gram_sum
        return float(_logdet_gram(gram).mean())

    def __call__(self, centers, frames) -> float:
        if self.kmax == 0:
            return 0.0
        return self.value_from_gram(self.block_grams(centers, frames).sum(axis=0))

    def for_array(self, centers, frames, b: int):
        """Objective as a function of array ``b``'s (center, frame) alone."""
        if self.kmax == 0:
            return lambda c, f: 0.0
        blocks = self.block_grams(centers, frames)
        others = blocks.sum(axis=0) - blocks[b]

        def value(center, frame):
            blk = self.block_grams(center[None, :], frame[None, :, :])[0]
            return self.value_from_gram(others + blk)

        return value


class SensingEvaluator:
    """Entropic soft-minimum of the isotropic-covariance received power.

    Powers are divided by ``power_ref_w`` before smoothing so that ``beta`` acts
    on a dimensionless quantity; values returned are in units of
    ``power_ref_w``.  With ``R_d = (P0/NB) I`` the received power at a point is
    ``(P0/NB) * nu * N * sum_b g_b``, independent of the steering phases.
    """

    def __init__(self, geom: ArrayGeometry, grid: AirwayGrid, cfg: SensingObjectiveCfg,
                 num_arrays: int, pattern: PatternParams = DEFAULT_PATTERN,
                 power_ref_w: float = 1.0):
        self.geom = geom
        self.cfg = cfg
        self.pattern = pattern
        self.dirs = grid.directions
        n = geom.antennas_per_array
        nb = n * num_arrays
        self.scale = cfg.power_budget_w / nb * n * cfg.pathloss.gain(grid.distance_m)
        self.power_ref_w = float(power_ref_w)

    def block_gains(self, frames) -> np.ndarray:
        return gains_linear(frames, self.dirs, self.pattern)  # (D, B)

    def powers(self, frames) -> np.ndarray:
        """Received power (W) at every grid point."""
        return self.scale * self.block_gains(frames).sum(axis=1)

    def value_from_gain_sum(self, gsum) -> float:
        return entropic_surrogate(self.scale * gsum / self.power_ref_w, self.cfg.beta)

    def __call__(self, centers, frames) -> float:
        return self.value_from_gain_sum(self.block_gains(frames).sum(axis=1))

    def for_array(self, centers, frames, b: int):
        g = self.block_gains(frames)
        others = g.sum(axis=1) - g[:, b]

        def value(center, frame):
            return self.value_from_gain_sum(others + self.block_gains(frame[None])[:, 0])

        return value
