"""Max-min received-power transmit covariance via a primal-dual interior-point SDP.

Problem, for channel rows ``h_i`` (i = 1..D) and budget ``P0``::

    maximise  chi
    s.t.      h_i^T R h_i^* >= chi   for all i
              tr(R) <= P0,  R Hermitian PSD

It is cast in standard primal form with ``X = blkdiag(R, diag(chi, s_1..s_D, s_0))``
and solved with an infeasible-start HKM path-following method using Mehrotra
predictor-corrector steps.  The dual is

    minimise  P0 * mu   s.t.   mu I >= sum_i w_i h_i^* h_i^T,  sum_i w_i >= 1,  w >= 0

and any non-negative ``w`` yields the certified upper bound
``P0 * lambda_max(sum_i w_i h_i^* h_i^T) / sum_i w_i`` on the optimum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import SolverStall
from ..objectives import grid_channels, powers_from_channels


@dataclass
class CovarianceResult:
    covariance: np.ndarray
    chi: float
    dual_bound: float
    gap: float
    iterations: int
    dual_weights: np.ndarray

    def __iter__(self):
        yield self.covariance
        yield self.chi


def _herm(M):
    return 0.5 * (M + M.conj().T)


def _max_step(X, dX):
    """Largest alpha with X + alpha dX PSD (X positive definite)."""
    L = np.linalg.cholesky(X)
    Li = np.linalg.inv(L)
    lam = np.linalg.eigvalsh(_herm(Li @ dX @ Li.conj().T)).min()
    return np.inf if lam >= 0 else -1.0 / lam


def _max_step_lp(x, dx):
    neg = dx < 0
    return np.min(-x[neg] / dx[neg]) if np.any(neg) else np.inf


def dual_upper_bound(V, w) -> float:
    """Upper bound ``lambda_max(sum w_i v_i v_i^H) / sum w`` (unit power budget)."""
    w = np.maximum(np.asarray(w, dtype=float), 0.0)
    if w.sum() <= 0:
        return np.inf
    S = (V * w) @ V.conj().T
    return float(np.linalg.eigvalsh(_herm(S)).max() / w.sum())


def solve_maxmin_sdp(Hs, power_budget_w: float = 1.0, gap_tol: float = 1e-6,
                     max_iter: int = 200) -> CovarianceResult:
    """Solve the max-min covariance SDP for channel rows ``Hs`` (D, n)."""
    Hs = np.atleast_2d(np.asarray(Hs, dtype=complex))
    D, n = Hs.shape
    # A_i = v_i v_i^H with v_i = conj(h_i) so that <A_i, R> = h_i^T R h_i^*
    scale = np.max(np.sum(np.abs(Hs) ** 2, axis=1))
    V = (Hs.conj() / np.sqrt(scale)).T  # (n, D)

    m = D + 1
    nl = D + 2  # chi, s_1..s_D, s_0
    A_l = np.zeros((m, nl))
    A_l[:D, 0] = -1.0
    A_l[np.arange(D), 1 + np.arange(D)] = -1.0
    A_l[D, D + 1] = 1.0
    b = np.zeros(m)
    b[D] = 1.0
    c_l = np.zeros(nl)
    c_l[0] = -1.0

    def A_s(X):
        out = np.empty(m)
        out[:D] = np.real(np.einsum("id,ij,jd->d", V.conj(), X, V))
        out[D] = np.real(np.trace(X))
        return out

    def A_s_T(y):
        return (V * y[:D]) @ V.conj().T + y[D] * np.eye(n)

    X = np.eye(n, dtype=complex) / n
    Z = np.eye(n, dtype=complex)
    x = np.ones(nl)
    z = np.ones(nl)
    y = np.zeros(m)
    N = n + nl

    best = None
    it = 0
    for it in range(1, max_iter + 1):
        rp = b - A_s(X) - A_l @ x
        Rd = -A_s_T(y) - Z
        rd = c_l - A_l.T @ y - z
        mu = (np.real(np.trace(X @ Z)) + x @ z) / N

        pobj = -x[0]
        dobj = b @ y
        rel_gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        infeas = max(np.linalg.norm(rp) / (1 + np.linalg.norm(b)),
                     np.linalg.norm(Rd) + np.linalg.norm(rd))

        # certificate from the current iterate
        R = _herm(X)
        tr = np.real(np.trace(R))
        if tr > 1.0:
            R = R / tr
        chi = float(np.min(np.real(np.einsum("id,ij,jd->d", V.conj(), R, V))))
        bound = dual_upper_bound(V, y[:D])
        cert_gap = (bound - chi) / bound if np.isfinite(bound) and bound > 0 else np.inf
        if best is None or cert_gap < best[3]:
            best = (R, chi, bound, cert_gap, y[:D].copy())
        if cert_gap <= gap_tol * 1e-2 or (rel_gap < 1e-12 and infeas < 1e-12):
            break

        Zi = np.linalg.inv(Z)
        Zi = _herm(Zi)
        P = V.conj().T @ X @ V
        Q = V.conj().T @ Zi @ V
        XZi = X @ Zi
        M = np.empty((m, m))
        M[:D, :D] = np.real(P * Q.T)
        cross = np.real(np.einsum("id,ij,jd->d", V.conj(), XZi, V))
        M[:D, D] = cross
        M[D, :D] = cross
        M[D, D] = np.real(np.trace(XZi))
        M += (A_l * (x / z)) @ A_l.T
        M = 0.5 * (M + M.T)
        try:
            cho = np.linalg.cholesky(M)
        except np.linalg.LinAlgError:
            cho = None

        def solve(rhs):
            if cho is not None:
                return np.linalg.solve(cho.conj().T, np.linalg.solve(cho, rhs))
            return np.linalg.lstsq(M, rhs, rcond=None)[0]

        def direction(sigma_mu, corr_s=None, corr_l=None):
            Gs = -X + sigma_mu * Zi - X @ Rd @ Zi
            gl = -x + sigma_mu / z - (x / z) * rd
            if corr_s is not None:
                Gs = Gs - corr_s
                gl = gl - corr_l
            rhs = rp - A_s(_herm(Gs)) - A_l @ gl
            dy = solve(rhs)
            dZ = _herm(Rd - A_s_T(dy))
            dz = rd - A_l.T @ dy
            dX = _herm(Gs + X @ A_s_T(dy) @ Zi)
            dx = gl + (x / z) * (A_l.T @ dy)
            return dX, dx, dy, dZ, dz

        # predictor
        dX, dx, dy, dZ, dz = direction(0.0)
        ap = min(1.0, _max_step(X, dX), _max_step_lp(x, dx))
        ad = min(1.0, _max_step(Z, dZ), _max_step_lp(z, dz))
        mu_aff = (np.real(np.trace((X + ap * dX) @ (Z + ad * dZ)))
                  + (x + ap * dx) @ (z + ad * dz)) / N
        sigma = min(1.0, (mu_aff / mu) ** 3)
        # corrector
        dX, dx, dy, dZ, dz = direction(sigma * mu, dX @ dZ @ Zi, dx * dz / z)
        ap = min(1.0, 0.95 * _max_step(X, dX), 0.95 * _max_step_lp(x, dx))
        ad = min(1.0, 0.95 * _max_step(Z, dZ), 0.95 * _max_step_lp(z, dz))
        X = _herm(X + ap * dX)
        x = x + ap * dx
        y = y + ad * dy
        Z = _herm(Z + ad * dZ)
        z = z + ad * dz

    R, chi, bound, gap, w = best
    result = CovarianceResult(power_budget_w * R, power_budget_w * scale * chi,
                              power_budget_w * scale * bound, gap, it, w)
    if gap > gap_tol:
        raise SolverStall(f"duality gap {gap:.3g} above target {gap_tol:.3g}",
                          covariance=result.covariance, chi=result.chi, gap=gap)
    return result


def optimize_covariance(layout, geom, grid, cfg, pattern=None, gap_tol: float = 1e-6,
                        max_iter: int = 200) -> CovarianceResult:
    """Max-min optimal transmit covariance for a fixed layout over an airway grid."""
    kwargs = {} if pattern is None else {"pattern": pattern}
    Hs = grid_channels(layout, geom, grid, cfg, **kwargs)
    res = solve_maxmin_sdp(Hs, cfg.power_budget_w, gap_tol, max_iter)
    # report chi as the achieved minimum of the returned covariance
    res.chi = float(powers_from_channels(Hs, res.covariance).min())
    return res
