"""Geodesics of the normal manifold via the lifted exponential construction.

The exponential map at the identity point shoots the one-parameter group
``G(t) = exp(t V)`` of the horizontal generator ``V`` built from the
tangent ``(A0, a0)``, confirms the block structure that the exchange
symmetry forces on its block LDL^T factors, and reads the normal point off
the leading (n+1)-block.  Along such a curve ``sigma^{-1} mu_dot`` and
``sigma^{-1} sigma_dot + a0 mu^T`` are conserved, which yields the
second-order equations

    sigma_ddot + mu_dot mu_dot^T - sigma_dot sigma^{-1} sigma_dot = 0,
    mu_ddot - sigma_dot sigma^{-1} mu_dot = 0,

used here as a finite-difference correctness oracle.

The inverse problem (log map) is solved by damped Gauss-Newton shooting on
the embedded residual with a finite-difference Jacobian, falling back to
recursive path subdivision for distant targets.  The solver returns the
solution found in its shooting basin; no claim of global minimality is
made when the connecting geodesic is not unique.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace

import numpy as np

from .matcore import block_cholesky, spd_log, special_structure_residuals, sym, sym_eigen, sym_exp
from .manifold import (
    GaussianPoint,
    Tangent,
    embed,
    metric_at_identity,
    normalize_to_identity,
    unembed,
)
from .sympair import horizontal_lift

STRUCTURE_TOL = 1e-8
FD_JACOBIAN_STEP = 1e-6


class ShootingError(RuntimeError):
    """Log-map shooting failed to converge; carries the last residual."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class GeodesicTrajectory:
    """Samples of a geodesic: times, points, generating tangent, base point."""

    ts: np.ndarray
    points: tuple[GaussianPoint, ...]
    source: Tangent
    basepoint: GaussianPoint

    @property
    def n(self) -> int:
        return self.source.n

    def with_points(self, points) -> "GeodesicTrajectory":
        return replace(self, points=tuple(points))


def _point_from_ambient(g: np.ndarray, n: int) -> GaussianPoint:
    theta = sym(g[:n, :n])
    sigma = sym(np.linalg.inv(theta))
    return GaussianPoint(sigma, sigma @ g[:n, n])


def exp_map(xi: Tangent, t: float) -> GaussianPoint:
    """Geodesic from the identity point with initial direction ``xi``, at time ``t``.

    Exponentiates the horizontal generator, verifies the block structure of
    the factorization (determinant-one middle pivot, reciprocal corner
    blocks), and reads off the normal point.
    """
    n = xi.n
    if t == 0.0:
        return GaussianPoint.identity(n)
    g = sym_exp(t * horizontal_lift(xi).matrix())
    m, d = block_cholesky(g)
    worst = max(special_structure_residuals(m, d).values())
    if worst > STRUCTURE_TOL * max(1.0, float(np.linalg.norm(g))):
        raise ArithmeticError(f"lifted geodesic lost its block structure: residual {worst:.3e}")
    return unembed(sym(g[: n + 1, : n + 1]))


def exp_map_from(p: GaussianPoint, xi: Tangent, t: float) -> GaussianPoint:
    """Geodesic from base point ``p``; ``xi`` lives in the normalized chart at ``p``."""
    chart = normalize_to_identity(p)
    return chart.inverse().apply(exp_map(xi, t))


def ambient_exponentials(xi: Tangent, ts: np.ndarray) -> np.ndarray:
    """Stack of lifted geodesic matrices ``exp(t V)`` for each t (one shared eigenbasis)."""
    v = horizontal_lift(xi).matrix()
    w, u = sym_eigen(v)
    ts = np.asarray(ts, dtype=float)
    return np.einsum("ik,tk,jk->tij", u, np.exp(np.outer(ts, w)), u)


def trajectory(xi: Tangent, ts, basepoint: GaussianPoint | None = None) -> GeodesicTrajectory:
    """Sample the geodesic with direction ``xi`` at the given times.

    Equivalent to calling :func:`exp_map` (or :func:`exp_map_from`) per
    sample, computed through one shared eigendecomposition.
    """
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    n = xi.n
    gs = ambient_exponentials(xi, ts)
    points = [_point_from_ambient(g, n) for g in gs]
    if basepoint is None:
        basepoint = GaussianPoint.identity(n)
    else:
        denorm = normalize_to_identity(basepoint).inverse()
        points = [denorm.apply(p) for p in points]
    return GeodesicTrajectory(ts=ts, points=tuple(points), source=xi, basepoint=basepoint)


def _stencil(traj: GeodesicTrajectory, h: float) -> tuple[np.ndarray, np.ndarray, int]:
    ts = traj.ts
    if ts.size < 3:
        raise ValueError("trajectory must contain at least three samples")
    deltas = np.diff(ts)
    spacing = float(deltas[0])
    if spacing <= 0 or np.max(np.abs(deltas - spacing)) > 1e-9 * max(spacing, 1e-30):
        raise ValueError("trajectory grid must be uniform and increasing")
    if h <= 0:
        raise ValueError("finite-difference step must be positive")
    m = int(round(h / spacing))
    if m < 1:
        raise ValueError(f"grid too coarse relative to h: spacing {spacing:.3e} exceeds step {h:.3e}")
    if abs(m * spacing - h) > 1e-9 * h:
        raise ValueError(f"step {h:.3e} is not a multiple of the grid spacing {spacing:.3e}")
    if ts.size < 2 * m + 1:
        raise ValueError("trajectory range too short for the requested finite-difference step")
    sigmas = np.stack([p.sigma for p in traj.points])
    mus = np.stack([p.mu for p in traj.points])
    return sigmas, mus, m


def geodesic_residual(traj: GeodesicTrajectory, h: float) -> float:
    """Max finite-difference residual of the geodesic equations over the grid.

    Central differences with step ``h`` (a multiple of the grid spacing)
    approximate first and second derivatives from the stored samples; the
    returned value is the max over interior samples of the Frobenius norm of
    the covariance equation plus the norm of the mean equation.
    """
    sigmas, mus, m = _stencil(traj, h)
    lo, hi = m, len(traj.ts) - m
    s0, sm, sp = sigmas[lo:hi], sigmas[lo - m:hi - m], sigmas[lo + m:hi + m]
    mu0, mum, mup = mus[lo:hi], mus[lo - m:hi - m], mus[lo + m:hi + m]
    sd = (sp - sm) / (2.0 * h)
    sdd = (sp - 2.0 * s0 + sm) / (h * h)
    mud = (mup - mum) / (2.0 * h)
    mudd = (mup - 2.0 * mu0 + mum) / (h * h)
    sinv_sd = np.linalg.solve(s0, sd)
    sinv_mud = np.linalg.solve(s0, mud[..., None])[..., 0]
    res_sigma = sdd + np.einsum("ti,tj->tij", mud, mud) - np.einsum("tik,tkj->tij", sd, sinv_sd)
    res_mu = mudd - np.einsum("tik,tk->ti", sd, sinv_mud)
    per_t = np.linalg.norm(res_sigma, axis=(1, 2)) + np.linalg.norm(res_mu, axis=1)
    return float(np.max(per_t))


def _recovered_series(traj: GeodesicTrajectory, h: float) -> tuple[np.ndarray, np.ndarray]:
    sigmas, mus, m = _stencil(traj, h)
    lo, hi = m, len(traj.ts) - m
    s0 = sigmas[lo:hi]
    sd = (sigmas[lo + m:hi + m] - sigmas[lo - m:hi - m]) / (2.0 * h)
    mud = (mus[lo + m:hi + m] - mus[lo - m:hi - m]) / (2.0 * h)
    a_series = np.linalg.solve(s0, mud[..., None])[..., 0]
    big_a = np.linalg.solve(s0, sd) + np.einsum("i,tj->tij", a_series[0], mus[lo:hi])
    return a_series, big_a


def first_integrals(traj: GeodesicTrajectory, h: float) -> tuple[float, float]:
    """Max drift of the two conserved quantities along the trajectory.

    ``sigma^{-1} mu_dot`` and ``sigma^{-1} sigma_dot + a mu^T`` (with ``a``
    the first recovered value) are constant on geodesics; returns their max
    deviations from the values at the earliest usable sample.
    """
    a_series, big_a = _recovered_series(traj, h)
    drift_a = float(np.max(np.linalg.norm(a_series - a_series[0], axis=1)))
    drift_big_a = float(np.max(np.linalg.norm(big_a - big_a[0], axis=(1, 2))))
    return drift_a, drift_big_a


def recovered_initial_direction(traj: GeodesicTrajectory, h: float) -> Tangent:
    """Finite-difference estimate of the generating tangent, for cross-checks."""
    a_series, big_a = _recovered_series(traj, h)
    return Tangent(A0=sym(big_a[0]), a0=a_series[0])


def _pack(xi: Tangent) -> np.ndarray:
    n = xi.n
    iu = np.triu_indices(n)
    return np.concatenate([xi.A0[iu], xi.a0])


def _unpack(vec: np.ndarray, n: int) -> Tangent:
    iu = np.triu_indices(n)
    a = np.zeros((n, n))
    k = iu[0].size
    a[iu] = vec[:k]
    a = a + a.T - np.diag(np.diag(a))
    return Tangent(A0=a, a0=vec[k:])


def _shoot(target: np.ndarray, guess: np.ndarray, n: int, tol: float, max_iter: int) -> tuple[np.ndarray, float]:
    scale = max(1.0, float(np.linalg.norm(target)))

    def residual(vec: np.ndarray) -> np.ndarray:
        return (embed(exp_map(_unpack(vec, n), 1.0)) - target).ravel()

    vec = guess.copy()
    f = residual(vec)
    res = float(np.linalg.norm(f))
    for _ in range(max_iter):
        if res <= tol * scale:
            return vec, res
        jac = np.empty((f.size, vec.size))
        for j in range(vec.size):
            bumped = vec.copy()
            bumped[j] += FD_JACOBIAN_STEP
            jac[:, j] = (residual(bumped) - f) / FD_JACOBIAN_STEP
        step, *_ = np.linalg.lstsq(jac, -f, rcond=None)
        alpha = 1.0
        while alpha > 2.0 ** -20:
            trial = vec + alpha * step
            f_trial = residual(trial)
            res_trial = float(np.linalg.norm(f_trial))
            if res_trial < res:
                vec, f, res = trial, f_trial, res_trial
                break
            alpha *= 0.5
        else:
            break  # no descent direction left; let the caller subdivide
    if res <= tol * scale:
        return vec, res
    raise ShootingError(f"shooting stalled at residual {res:.3e}", residual=res)


def _log_normalized(qn: GaussianPoint, tol: float, max_iter: int, init_scale: float, depth: int = 8) -> Tangent:
    n = qn.n
    target = embed(qn)
    guess = init_scale * _pack(Tangent(A0=spd_log(qn.sigma), a0=qn.mu))
    try:
        vec, _ = _shoot(target, guess, n, tol, max_iter)
        return _unpack(vec, n)
    except ShootingError:
        if depth <= 0:
            raise
    # Path subdivision: solve toward a halfway target on a cheap connecting
    # curve, then retry the full problem from the doubled tangent.
    half = GaussianPoint(sym_exp(0.5 * spd_log(qn.sigma)), 0.5 * qn.mu)
    xi_half = _log_normalized(half, tol, max_iter, init_scale, depth - 1)
    vec, _ = _shoot(target, 2.0 * _pack(xi_half), n, tol, max_iter)
    return _unpack(vec, n)


def log_map(
    p: GaussianPoint,
    q: GaussianPoint,
    tol: float = 1e-12,
    max_iter: int = 100,
    init_scale: float = 1.0,
) -> Tangent:
    """Initial direction (in the normalized chart at ``p``) of the geodesic reaching ``q`` at time 1.

    Damped Gauss-Newton shooting on the embedded residual; converged when
    the Frobenius residual drops below ``tol`` times the target scale.
    Distant targets are handled by recursive path subdivision.

    Raises
    ------
    ShootingError
        If the iteration stalls; the exception carries the last residual.
    """
    if p.n != q.n:
        raise ValueError("points must share a dimension")
    chart = normalize_to_identity(p)
    return _log_normalized(chart.apply(q), tol, max_iter, init_scale)


def distance(p: GaussianPoint, q: GaussianPoint, convention: str = "paper", **opts) -> float:
    """Geodesic distance: the metric norm of the connecting log tangent."""
    if p.close_to(q):
        return 0.0
    xi = log_map(p, q, **opts)
    return float(np.sqrt(max(0.0, metric_at_identity(xi, xi, convention))))


def trajectory_header(n: int) -> list[str]:
    cols = ["t"]
    cols += [f"sigma_{i + 1}{j + 1}" for i in range(n) for j in range(n)]
    cols += [f"mu_{i + 1}" for i in range(n)]
    return cols


def write_trajectory_csv(traj: GeodesicTrajectory, fh) -> None:
    """Write samples as CSV: t, row-major covariance entries, mean entries."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(trajectory_header(traj.n))
    for t, point in zip(traj.ts, traj.points):
        row = [f"{t:.17g}"]
        row += [f"{v:.17g}" for v in point.sigma.ravel()]
        row += [f"{v:.17g}" for v in point.mu]
        writer.writerow(row)


def read_trajectory_csv(fh) -> tuple[np.ndarray, list[GaussianPoint]]:
    """Parse the CSV format written by :func:`write_trajectory_csv`."""
    reader = csv.reader(io.StringIO(fh.read()) if isinstance(fh, str) else fh)
    header = next(reader)
    width = len(header) - 1
    n = int(round((np.sqrt(4 * width + 1) - 1) / 2))  # width = n^2 + n
    if n * n + n != width:
        raise ValueError(f"malformed trajectory header of width {width}")
    ts, points = [], []
    for row in reader:
        vals = [float(v) for v in row]
        ts.append(vals[0])
        sigma = np.array(vals[1:1 + n * n]).reshape(n, n)
        points.append(GaussianPoint(sym(sigma), np.array(vals[1 + n * n:])))
    return np.array(ts), points
