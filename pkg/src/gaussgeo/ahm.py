"""Arithmetic-harmonic mean iteration and geodesic midpoints.

For SPD matrices the simultaneous recursion

    P' = (P + Q) / 2,        Q' = 2 (P^{-1} + Q^{-1})^{-1}

converges quadratically, from both sides in the definite order, to the
matrix geometric mean of the initial pair, which is the midpoint of the
connecting geodesic in the affine-invariant geometry.  One step contracts
the gap exactly by

    Q' - P' = -1/2 (Q - P) (P + Q)^{-1} (Q - P),

a negative semidefinite quantity (the scalar pair (4, 1) maps to
(2.5, 1.6), so the sign is forced).  Two conserved structures matter for
the lifted geodesics: the product det(P) det(Q) is invariant step to step,
and once both initial matrices satisfy the exchange symmetry
``J X^{-1} J = X`` the involution swaps the iterates pairwise
(``J P_k^{-1} J = Q_k`` for k >= 1), so the common limit satisfies the
symmetry and projects back onto the normal manifold.  Individual iterates
drift off the symmetric slice (and off determinant one) by an amount of the
order of the current gap; only the limit restores both exactly.

Midpoints of normal distributions are computed by lifting the endpoints to
the identity and the exponential of the connecting generator, running the
mean iteration upstairs, projecting, and undoing the normalization; the
halved exponential provides an independent cross-check of the same point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .matcore import check_special_symmetry, require_spd, spd_inv, spd_sqrt, sym, sym_exp
from .manifold import GaussianPoint, normalize_to_identity, unembed
from .geodesic import exp_map, log_map
from .sympair import MEMBERSHIP_TOL, horizontal_lift, submersion_project

AHM_TOL = 1e-12
AHM_MAX_ITER = 60
MIDPOINT_CROSSCHECK_TOL = 1e-8


@dataclass(frozen=True)
class AhmPair:
    """State of the mean iteration: the SPD pair and the iteration count."""

    P: np.ndarray
    Q: np.ndarray
    iteration: int = 0

    def gap(self) -> float:
        return float(np.linalg.norm(self.Q - self.P))


def ahm_step(pair: AhmPair) -> AhmPair:
    """One step of the arithmetic-harmonic recursion."""
    p = require_spd(pair.P, name="P")
    q = require_spd(pair.Q, name="Q")
    p_next = sym(0.5 * (p + q))
    q_next = sym(2.0 * spd_inv(spd_inv(p) + spd_inv(q)))
    require_spd(p_next, name="arithmetic mean")
    require_spd(q_next, name="harmonic mean")
    return AhmPair(P=p_next, Q=q_next, iteration=pair.iteration + 1)


def gap_identity_residual(before: AhmPair, after: AhmPair) -> float:
    """Residual of the exact one-step gap contraction identity."""
    delta = before.Q - before.P
    predicted = -0.5 * delta @ np.linalg.solve(before.P + before.Q, delta)
    return float(np.linalg.norm((after.Q - after.P) - sym(predicted)))


def ahm_sequence(p0: np.ndarray, q0: np.ndarray, tol: float = AHM_TOL, max_iter: int = AHM_MAX_ITER) -> list[AhmPair]:
    """All iterates from (p0, q0) until the gap falls below ``tol`` (relative)."""
    pair = AhmPair(P=require_spd(p0, name="P0"), Q=require_spd(q0, name="Q0"), iteration=0)
    out = [pair]
    for _ in range(max_iter):
        if pair.gap() <= tol * max(1.0, float(np.linalg.norm(pair.P))):
            return out
        pair = ahm_step(pair)
        out.append(pair)
    if pair.gap() <= tol * max(1.0, float(np.linalg.norm(pair.P))):
        return out
    raise RuntimeError(f"mean iteration did not converge in {max_iter} steps (gap {pair.gap():.3e})")


def ahm_midpoint(p0: np.ndarray, q0: np.ndarray, tol: float = AHM_TOL, max_iter: int = AHM_MAX_ITER) -> np.ndarray:
    """Geodesic midpoint (matrix geometric mean) of an SPD pair."""
    final = ahm_sequence(p0, q0, tol=tol, max_iter=max_iter)[-1]
    return sym(0.5 * (final.P + final.Q))


def direct_midpoint(p0: np.ndarray, q0: np.ndarray) -> np.ndarray:
    """Closed-form geometric mean, the independent reference for the iteration."""
    root = spd_sqrt(require_spd(p0, name="P0"))
    inner = spd_sqrt(sym(np.linalg.solve(root, np.linalg.solve(root, q0).T).T))
    return sym(root @ inner @ root)


def midpoint_N(p: GaussianPoint, q: GaussianPoint, tol: float = AHM_TOL, max_iter: int = AHM_MAX_ITER, **log_opts) -> GaussianPoint:
    """Midpoint of the geodesic segment between two normal distributions.

    Pipeline: normalize ``p`` to the identity, shoot the connecting tangent,
    lift the endpoints to the identity matrix and the exponential of the
    generator, run the mean iteration upstairs, verify the limit kept the
    exchange symmetry, project, and denormalize.  The result is
    cross-checked against the halved exponential of the same tangent; the
    two routes are independent computations of one point.
    """
    if p.close_to(q):
        return p
    chart = normalize_to_identity(p)
    xi = log_map(p, q, **log_opts)
    n = xi.n
    lifted_mid = ahm_midpoint(np.eye(2 * n + 1), sym_exp(horizontal_lift(xi).matrix()), tol=tol, max_iter=max_iter)
    residual = check_special_symmetry(lifted_mid)
    if residual > MEMBERSHIP_TOL * max(1.0, float(np.linalg.norm(lifted_mid))):
        raise ArithmeticError(f"mean iteration limit left the symmetric slice: residual {residual:.3e}")
    result = chart.inverse().apply(unembed(submersion_project(lifted_mid)))
    reference = chart.inverse().apply(exp_map(xi, 0.5))
    deviation = float(np.linalg.norm(result.sigma - reference.sigma)) + float(np.linalg.norm(result.mu - reference.mu))
    scale = max(1.0, float(np.linalg.norm(reference.sigma)))
    if deviation > MIDPOINT_CROSSCHECK_TOL * scale:
        raise ArithmeticError(f"mean-iteration midpoint disagrees with the halved exponential by {deviation:.3e}")
    return result


def interpolate(p: GaussianPoint, q: GaussianPoint, depth: int, **opts) -> list[GaussianPoint]:
    """Dyadic geodesic interpolation: 2**depth + 1 points from ``p`` to ``q``.

    Endpoints are returned exactly; interior points are recursive midpoints.
    """
    if depth < 1:
        raise ValueError("depth must be a positive integer")
    if depth == 1:
        return [p, midpoint_N(p, q, **opts), q]
    mid = midpoint_N(p, q, **opts)
    left = interpolate(p, mid, depth - 1, **opts)
    right = interpolate(mid, q, depth - 1, **opts)
    return left + right[1:]
