"""Brute-force reference solvers used by the unit and acceptance tests."""

import numpy as np

from ht6dma.harness.layouts import fibonacci_directions
from ht6dma.geometry import HALF_PI

_SPHERE = fibonacci_directions(600_000)


def _circle(normal, offset, n):
    """Points of the unit sphere on the plane ``normal . x = offset``."""
    k = np.linalg.norm(normal)
    nhat, off = normal / k, offset / k
    if abs(off) > 1:
        return np.zeros((0, 3))
    center = off * nhat
    r = np.sqrt(1 - off ** 2)
    a = np.cross(nhat, [1.0, 0, 0] if abs(nhat[0]) < 0.9 else [0, 1.0, 0])
    a /= np.linalg.norm(a)
    b = np.cross(nhat, a)
    ang = np.linspace(0, 2 * np.pi, n, endpoint=False)
    return center + r * (np.cos(ang)[:, None] * a + np.sin(ang)[:, None] * b)


def position_candidates(l_prev, others, d_ratio, rng, per_circle=150_000, interior=100_000):
    """About 10^6 candidate points of the ball: sphere lattice, constraint circles, interior."""
    A = 2.0 * (np.asarray(l_prev)[None] - np.asarray(others))
    c = np.full(len(A), d_ratio ** 2)
    pts = [_SPHERE]
    for a, ci in zip(A, c):
        pts.append(_circle(a, ci, per_circle))
    v = rng.normal(size=(interior, 3))
    v *= (rng.uniform(size=interior) ** (1 / 3) / np.linalg.norm(v, axis=1))[:, None]
    pts.append(v)
    return np.vstack(pts), A, c


def position_oracle(grad, l_prev, others, d_ratio, rng, tol=1e-12):
    """Best feasible candidate value of ``grad . l``."""
    pts, A, c = position_candidates(l_prev, others, d_ratio, rng)
    ok = np.all(pts @ A.T - c >= -tol, axis=1) & (np.einsum("ij,ij->i", pts, pts) <= 1 + 1e-12)
    return float((pts[ok] @ grad).max())


def rotation_box(u_prev, trust):
    lo = np.array([max(-trust, -u_prev[0]), -trust])
    hi = np.array([trust, trust])
    return lo, hi


def rotation_oracle(grad, G, h, lo, hi, grid=1001, per_line=200_000):
    """Best value of ``grad . du`` over a dense box grid plus samples on every boundary line."""
    xs = np.linspace(lo[0], hi[0], grid)
    ys = np.linspace(lo[1], hi[1], grid)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    pts = [np.stack([X.ravel(), Y.ravel()], 1)]
    t = np.linspace(0.0, 1.0, per_line)
    for g, hv in zip(G, h):
        if abs(g[1]) > abs(g[0]):
            x = lo[0] + t * (hi[0] - lo[0])
            pts.append(np.stack([x, (hv - g[0] * x) / g[1]], 1))
        else:
            y = lo[1] + t * (hi[1] - lo[1])
            pts.append(np.stack([(hv - g[1] * y) / g[0], y], 1))
    for x in (lo[0], hi[0]):
        pts.append(np.stack([np.full(per_line, x), lo[1] + t * (hi[1] - lo[1])], 1))
    for y in (lo[1], hi[1]):
        pts.append(np.stack([lo[0] + t * (hi[0] - lo[0]), np.full(per_line, y)], 1))
    P = np.vstack(pts)
    ok = np.all(P >= lo - 1e-15, axis=1) & np.all(P <= hi + 1e-15, axis=1)
    if len(G):
        ok &= np.all(P @ np.asarray(G).T - h <= 1e-13, axis=1)
    return float((P[ok] @ grad).max())


def random_position_instance(rng, n_others):
    """Random feasible instance with neighbours close enough to bind."""
    while True:
        l_prev = rng.normal(size=3)
        l_prev /= np.linalg.norm(l_prev)
        d_ratio = rng.uniform(0.1, 0.6)
        others = []
        for _ in range(n_others):
            v = l_prev + rng.normal(scale=0.5, size=3)
            others.append(v / np.linalg.norm(v))
        others = np.array(others)
        if np.all(np.linalg.norm(others - l_prev, axis=1) >= d_ratio):
            return rng.normal(size=3), l_prev, others, d_ratio


def random_rotation_instance(rng, n_others):
    """Random placement, feasible local rotation and nearby neighbours."""
    from ht6dma.geometry import global_rotations, local_rotations, pointing_vectors

    while True:
        th, ph = rng.uniform(-1.4, 1.4), rng.uniform(-np.pi, np.pi)
        u = np.array([rng.uniform(0.2, HALF_PI), rng.uniform(-np.pi, np.pi)])
        l_b = pointing_vectors(th, ph)
        frame = global_rotations(th, ph)
        others = l_b + rng.normal(scale=0.6, size=(n_others, 3))
        others /= np.linalg.norm(others, axis=1, keepdims=True)
        n = frame @ local_rotations(u[0], u[1])[:, 2]
        if np.all((others - l_b) @ n <= 0):
            return rng.normal(size=2), u, frame, l_b, others


def psd2_grid_oracle(Hs, power_budget_w, points=5, max_rounds=5000, tol=1e-14):
    """Max-min power over 2x2 covariances by grid pattern search.

    ``R = P0 [[a, c], [c*, 1 - a]]`` with ``c = rho sqrt(a (1 - a)) e^{i psi}``
    covers every unit-trace PSD matrix as ``(a, rho, psi)`` ranges over a box;
    full trace is optimal since received powers scale with R.  A coarse grid
    picks the start; each round searches a local grid around the incumbent and
    the box shrinks only when a round brings no improvement, which lets the
    search follow the non-smooth equal-power ridge.
    """
    Hs = np.asarray(Hs)
    h0, h1 = Hs[:, 0], Hs[:, 1]
    p00, p11 = np.abs(h0) ** 2, np.abs(h1) ** 2
    cross = h0 * h1.conj()  # power = a p00 + (1-a) p11 + 2 Re(c cross)
    lo, hi = np.array([0.0, 0.0, -np.inf]), np.array([1.0, 1.0, np.inf])

    def best_on(A, Rho, Psi):
        A, Rho = np.clip(A, lo[0], hi[0]), np.clip(Rho, lo[1], hi[1])
        c = Rho * np.sqrt(A * (1 - A)) * np.exp(1j * Psi)
        pw = (A[:, None] * p00 + (1 - A)[:, None] * p11
              + 2 * np.real(c[:, None] * cross))
        val = pw.min(axis=1)
        k = int(np.argmax(val))
        return float(val[k]), np.array([A[k], Rho[k], Psi[k]])

    def grid(center, half, n):
        axes = [np.linspace(c - h, c + h, n) for c, h in zip(center, half)]
        return (g.ravel() for g in np.meshgrid(*axes, indexing="ij"))

    rng = np.random.default_rng(0)
    best, pt = best_on(*grid([0.5, 0.5, 0.0], [0.5, 0.5, np.pi], 61))
    half = np.array([1.0, 1.0, 2 * np.pi]) / 60
    for _ in range(max_rounds):
        # axis grid plus random offsets, so the search can move along oblique ridges
        G = np.stack(list(grid(pt, half, points)), 1)
        G = np.vstack([G, pt + half * rng.uniform(-1, 1, size=(2000, 3))])
        val, cand = best_on(*G.T)
        if val > best * (1 + tol):
            best, pt = val, cand
        else:
            half = half * 0.5
            if half.max() < 1e-13:
                break
    return power_budget_w * best
