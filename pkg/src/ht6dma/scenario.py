"""User drops (hotspot Poisson model) and airway segments."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .geometry import direction_angles, pointing_vectors

BACKGROUND = 0


@dataclass(frozen=True)
class Hotspot:
    center: tuple[float, float, float]
    radius_m: float
    mean: float


@dataclass(frozen=True)
class UserDistribution:
    """Users in a spherical annulus: Poisson counts per region, uniform within.

    Region 0 is the annulus minus the hotspot spheres; region ``i >= 1`` is
    hotspot ``i - 1``.
    """

    annulus_inner_m: float
    annulus_outer_m: float
    hotspots: tuple[Hotspot, ...] = ()
    background_mean: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "hotspots", tuple(self.hotspots))
        if not 0 <= self.annulus_inner_m < self.annulus_outer_m:
            raise ValueError("need 0 <= annulus_inner_m < annulus_outer_m")
        if self.background_mean < 0 or any(h.mean < 0 for h in self.hotspots):
            raise ValueError("Poisson means must be non-negative")
        for h in self.hotspots:
            r = float(np.linalg.norm(h.center))
            if r - h.radius_m < self.annulus_inner_m or r + h.radius_m > self.annulus_outer_m:
                raise ValueError(f"hotspot at {h.center} is not inside the annulus")

    @property
    def means(self) -> np.ndarray:
        return np.array([self.background_mean] + [h.mean for h in self.hotspots])

    @property
    def homogeneous_ratio(self) -> float:
        total = self.means.sum()
        return float(self.background_mean / total) if total > 0 else 0.0


DEFAULT_HOTSPOT_CENTERS = ((30.0, -60.0, -50.0), (-40.0, 0.0, 60.0), (0.0, 100.0, 20.0))


def hotspot_distribution(total_mean: float = 24.0, eta: float = 0.0, inner_m: float = 50.0,
                         outer_m: float = 120.0, centers=DEFAULT_HOTSPOT_CENTERS,
                         hotspot_radius_m: float = 15.0) -> UserDistribution:
    """Three equal-mean hotspots plus background, split by homogeneous ratio ``eta``."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError("eta must lie in [0, 1]")
    per_hotspot = (1.0 - eta) * total_mean / len(centers)
    spots = tuple(Hotspot(tuple(map(float, c)), hotspot_radius_m, per_hotspot) for c in centers)
    return UserDistribution(inner_m, outer_m, spots, eta * total_mean)


@dataclass(frozen=True)
class UserDrop:
    positions: np.ndarray  # (K, 3) metres
    regions: np.ndarray  # (K,) generating region index

    @property
    def num_users(self) -> int:
        return len(self.positions)

    @property
    def distances(self) -> np.ndarray:
        return np.linalg.norm(self.positions, axis=1)

    @property
    def directions(self) -> np.ndarray:
        return self.positions / self.distances[:, None]

    @property
    def angles(self) -> tuple[np.ndarray, np.ndarray]:
        """(elevation, azimuth) of every user seen from the BS centre."""
        return direction_angles(self.positions)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "y", "z", "region"])
        for p, r in zip(self.positions, self.regions):
            w.writerow([repr(float(p[0])), repr(float(p[1])), repr(float(p[2])), int(r)])
        return buf.getvalue()


def _as_rng(seed_or_rng) -> np.random.Generator:
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.default_rng(seed_or_rng)


def _uniform_directions(rng, n):
    v = rng.standard_normal((n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _uniform_in_ball(rng, center, radius, n):
    r = radius * rng.random(n) ** (1.0 / 3.0)
    return np.asarray(center) + r[:, None] * _uniform_directions(rng, n)


def _inside_any(points, hotspots):
    inside = np.zeros(len(points), dtype=bool)
    for h in hotspots:
        inside |= np.linalg.norm(points - np.asarray(h.center), axis=1) < h.radius_m
    return inside


def _uniform_in_background(rng, dist: UserDistribution, n):
    lo, hi = dist.annulus_inner_m ** 3, dist.annulus_outer_m ** 3
    out = np.empty((0, 3))
    while len(out) < n:
        m = 2 * (n - len(out)) + 4
        r = (lo + (hi - lo) * rng.random(m)) ** (1.0 / 3.0)
        pts = r[:, None] * _uniform_directions(rng, m)
        out = np.vstack([out, pts[~_inside_any(pts, dist.hotspots)]])
    return out[:n]


def sample_user_drop(dist: UserDistribution, seed=None) -> UserDrop:
    """Draw one drop.  ``seed`` is an int or a ``numpy.random.Generator``."""
    rng = _as_rng(seed)
    counts = rng.poisson(dist.means)
    pos = [_uniform_in_background(rng, dist, counts[0])]
    reg = [np.full(counts[0], BACKGROUND)]
    for i, h in enumerate(dist.hotspots, start=1):
        pos.append(_uniform_in_ball(rng, h.center, h.radius_m, counts[i]))
        reg.append(np.full(counts[i], i))
    return UserDrop(np.vstack(pos).reshape(-1, 3), np.concatenate(reg).astype(int))


def sample_drops(dist: UserDistribution, num: int, seed=None) -> list[UserDrop]:
    """``num`` independent drops from one stream (the frozen Monte-Carlo set)."""
    rng = _as_rng(seed)
    return [sample_user_drop(dist, rng) for _ in range(num)]


# -- airways -----------------------------------------------------------------


@dataclass(frozen=True)
class AirwayPoint:
    xi: float
    theta: float
    phi: float
    distance_m: float


@dataclass(frozen=True)
class AirwaySegment:
    start: tuple[float, float, float]
    end: tuple[float, float, float]

    def __post_init__(self):
        object.__setattr__(self, "start", tuple(map(float, self.start)))
        object.__setattr__(self, "end", tuple(map(float, self.end)))
        if np.allclose(self.start, self.end):
            raise ValueError("airway start and end coincide")

    def position(self, xi):
        xi = np.asarray(xi, dtype=float)
        return (1 - xi)[..., None] * np.asarray(self.start) + xi[..., None] * np.asarray(self.end)


DEFAULT_AIRWAYS = (
    AirwaySegment((-30.0, -50.0, 30.0), (60.0, 40.0, 30.0)),
    AirwaySegment((50.0, -40.0, 30.0), (5.0, 40.0, 30.0)),
)


def airway_point(seg: AirwaySegment, xi: float) -> AirwayPoint:
    if not 0.0 <= xi <= 1.0:
        raise ValueError("xi must lie in [0, 1]")
    r = seg.position(xi)
    theta, phi = direction_angles(r)
    return AirwayPoint(float(xi), float(theta), float(phi), float(np.linalg.norm(r)))


@dataclass(frozen=True)
class AirwayGrid:
    """Discretised airway: parallel arrays over the grid points."""

    xi: np.ndarray
    theta: np.ndarray
    phi: np.ndarray
    distance_m: np.ndarray
    segment_index: np.ndarray = field(default=None)

    def __len__(self):
        return len(self.xi)

    @property
    def directions(self) -> np.ndarray:
        return pointing_vectors(self.theta, self.phi)

    def points(self) -> list[AirwayPoint]:
        return [AirwayPoint(float(a), float(b), float(c), float(d))
                for a, b, c, d in zip(self.xi, self.theta, self.phi, self.distance_m)]


def airway_grid(seg: AirwaySegment, D: int = 64, include_endpoint: bool = False) -> AirwayGrid:
    """Equally spaced points ``{0, 1/D, ..., (D-1)/D}`` (plus 1 if requested)."""
    if D < 2:
        raise ValueError("grid size D must be >= 2")
    xi = np.arange(D + int(include_endpoint)) / D
    r = seg.position(xi)
    theta, phi = direction_angles(r)
    return AirwayGrid(xi, theta, phi, np.linalg.norm(r, axis=1), np.zeros(len(xi), dtype=int))


def union_grid(grids) -> AirwayGrid:
    """Concatenate several airway grids; the sensing minimum ranges over all."""
    grids = list(grids)
    return AirwayGrid(
        np.concatenate([g.xi for g in grids]),
        np.concatenate([g.theta for g in grids]),
        np.concatenate([g.phi for g in grids]),
        np.concatenate([g.distance_m for g in grids]),
        np.concatenate([np.full(len(g), i) for i, g in enumerate(grids)]),
    )
