"""The manifold of multivariate normal distributions.

A point is a pair ``(sigma, mu)`` with ``sigma`` SPD of order n.  The
natural-parameter realization embeds the manifold into SPD matrices of
order n+1::

    H = [ theta     delta ]      theta = sigma^{-1}
        [ delta^T   1 + delta^T theta^{-1} delta ]      delta = sigma^{-1} mu

Tangent vectors at the identity point ``(id, 0)`` are pairs ``(A0, a0)``
of a symmetric matrix and a vector; they equal ``(sigma_dot(0), mu_dot(0))``
of the geodesic they generate.  The inner product at the identity is
``2 * trace(T(X) T(Y))`` on the embedded tangents
``T(X) = [[-A0, a0], [a0^T, 0]]`` ("paper" convention); the statistical
Fisher metric is exactly one quarter of that quadratic form, which the
Gauss-Hermite oracle :func:`fisher_numeric` pins down numerically.

Inner products at other base points are obtained by pulling back through
:func:`normalize_to_identity`; affine changes of variables are sufficient
statistics and hence isometries.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .matcore import require_spd, require_symmetric, spd_inv, spd_power, spd_sqrt, sym

# unembed accepts inputs produced by iterative algorithms, whose corner
# entry carries accumulated error.
CONSISTENCY_TOL = 1e-8

FISHER_QUAD_MAX_DIM = 3


@dataclass(frozen=True)
class GaussianPoint:
    """A normal distribution: covariance ``sigma`` (SPD) and mean ``mu``."""

    sigma: np.ndarray
    mu: np.ndarray

    def __post_init__(self):
        sigma = require_spd(self.sigma, name="sigma")
        mu = np.atleast_1d(np.asarray(self.mu, dtype=float))
        if mu.ndim != 1 or mu.shape[0] != sigma.shape[0]:
            raise ValueError(f"mu must be a vector of length {sigma.shape[0]}, got shape {mu.shape}")
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "mu", mu)

    @property
    def n(self) -> int:
        return self.sigma.shape[0]

    @staticmethod
    def identity(n: int) -> "GaussianPoint":
        return GaussianPoint(np.eye(n), np.zeros(n))

    def close_to(self, other: "GaussianPoint", tol: float = 1e-12) -> bool:
        scale = max(1.0, float(np.linalg.norm(self.sigma)), float(np.linalg.norm(self.mu)))
        return (
            np.linalg.norm(self.sigma - other.sigma) <= tol * scale
            and np.linalg.norm(self.mu - other.mu) <= tol * scale
        )


@dataclass(frozen=True)
class NaturalPoint:
    """Natural parameters: ``theta = sigma^{-1}``, ``delta = sigma^{-1} mu``."""

    theta: np.ndarray
    delta: np.ndarray


@dataclass(frozen=True)
class Tangent:
    """Tangent vector ``(A0, a0)`` at the identity point: symmetric matrix + vector."""

    A0: np.ndarray
    a0: np.ndarray

    def __post_init__(self):
        A0 = require_symmetric(self.A0, name="A0")
        a0 = np.atleast_1d(np.asarray(self.a0, dtype=float))
        if a0.shape[0] != A0.shape[0]:
            raise ValueError(f"a0 must have length {A0.shape[0]}, got {a0.shape[0]}")
        object.__setattr__(self, "A0", A0)
        object.__setattr__(self, "a0", a0)

    @property
    def n(self) -> int:
        return self.A0.shape[0]

    @staticmethod
    def zero(n: int) -> "Tangent":
        return Tangent(np.zeros((n, n)), np.zeros(n))

    def scaled(self, c: float) -> "Tangent":
        return Tangent(c * self.A0, c * self.a0)

    def embedded(self) -> np.ndarray:
        """The (n+1)-order symmetric matrix [[-A0, a0], [a0^T, 0]]."""
        n = self.n
        t = np.zeros((n + 1, n + 1))
        t[:n, :n] = -self.A0
        t[:n, n] = self.a0
        t[n, :n] = self.a0
        return t


def to_natural(p: GaussianPoint) -> NaturalPoint:
    theta = spd_inv(p.sigma)
    return NaturalPoint(theta=theta, delta=theta @ p.mu)


def from_natural(q: NaturalPoint) -> GaussianPoint:
    sigma = spd_inv(require_spd(q.theta, name="theta"))
    return GaussianPoint(sigma, sigma @ q.delta)


def embed(p: GaussianPoint) -> np.ndarray:
    """Natural-parameter embedding into SPD matrices of order n+1.

    Leading block ``sigma^{-1}``, border ``sigma^{-1} mu``, corner
    ``1 + mu^T sigma^{-1} mu``.
    """
    n = p.n
    theta = spd_inv(p.sigma)
    delta = theta @ p.mu
    h = np.zeros((n + 1, n + 1))
    h[:n, :n] = theta
    h[:n, n] = delta
    h[n, :n] = delta
    h[n, n] = 1.0 + float(p.mu @ delta)
    return h


def corner_residual(h: np.ndarray) -> float:
    """Deviation of the corner entry from ``1 + delta^T theta^{-1} delta``."""
    h = require_symmetric(h, tol=1e-10, name="embedded point")
    n = h.shape[0] - 1
    theta = require_spd(h[:n, :n], name="leading block")
    delta = h[:n, n]
    return abs(float(h[n, n]) - 1.0 - float(delta @ np.linalg.solve(theta, delta)))


def unembed(h: np.ndarray, tol: float = CONSISTENCY_TOL) -> GaussianPoint:
    """Invert :func:`embed`.

    Raises
    ------
    ValueError
        If the corner entry is inconsistent with the leading blocks beyond
        ``tol`` (scaled), i.e. the input does not represent a normal
        distribution.
    """
    h = require_symmetric(h, tol=1e-10, name="embedded point")
    n = h.shape[0] - 1
    res = corner_residual(h)
    scale = max(1.0, float(np.linalg.norm(h)))
    if res > tol * scale:
        raise ValueError(f"corner entry inconsistent with leading blocks: residual {res:.3e} exceeds {tol:.1e} * {scale:.3e}")
    sigma = spd_inv(require_spd(h[:n, :n], name="leading block"))
    return GaussianPoint(sigma, sigma @ h[:n, n])


def alt_embed_check(p: GaussianPoint) -> float:
    """Cross-check of the embedding against its moment-matrix form.

    The inverse of ``[[sigma + mu mu^T, -mu], [-mu^T, 1]]`` equals
    :func:`embed` of the same point; returns the Frobenius norm of the
    difference (contract: <= 1e-10 for valid points).
    """
    n = p.n
    m = np.zeros((n + 1, n + 1))
    m[:n, :n] = p.sigma + np.outer(p.mu, p.mu)
    m[:n, n] = -p.mu
    m[n, :n] = -p.mu
    m[n, n] = 1.0
    return float(np.linalg.norm(sym(np.linalg.inv(m)) - embed(p)))


def metric_at_identity(x: Tangent, y: Tangent, convention: str = "paper") -> float:
    """Inner product of tangents at the identity point.

    ``paper``: ``2 * trace(T(x) T(y))`` on the embedded tangents, which is
    the pushed-forward ambient trace metric.  ``fisher``: the statistical
    Fisher metric, exactly one quarter of that value (pinned by the
    :func:`fisher_numeric` quadrature oracle).
    """
    if x.n != y.n:
        raise ValueError(f"dimension mismatch: {x.n} vs {y.n}")
    value = 2.0 * float(np.trace(x.embedded() @ y.embedded()))
    if convention == "paper":
        return value
    if convention == "fisher":
        return 0.25 * value
    raise ValueError(f"unknown metric convention {convention!r}")


def tangent_norm(x: Tangent, convention: str = "paper") -> float:
    return float(np.sqrt(max(0.0, metric_at_identity(x, x, convention))))


@dataclass(frozen=True)
class AffineMap:
    """Affine change of variables ``x -> A x + b`` acting on distributions."""

    A: np.ndarray
    b: np.ndarray

    def apply(self, q: GaussianPoint) -> GaussianPoint:
        return GaussianPoint(sym(self.A @ q.sigma @ self.A.T), self.A @ q.mu + self.b)

    def inverse(self) -> "AffineMap":
        a_inv = np.linalg.inv(self.A)
        return AffineMap(A=a_inv, b=-a_inv @ self.b)


def normalize_to_identity(p: GaussianPoint) -> AffineMap:
    """Affine map sending ``p`` to the identity point ``(id, 0)``.

    ``A = sigma_p^{-1/2}``, ``b = -sigma_p^{-1/2} mu_p``; such maps are
    sufficient statistics and therefore isometries of the metric.
    """
    a = spd_power(p.sigma, -0.5, name="sigma")
    return AffineMap(A=a, b=-a @ p.mu)


def _score(p: GaussianPoint, x: Tangent, pts: np.ndarray) -> np.ndarray:
    # Directional derivative of log-density along (sigma_dot, mu_dot) = (A0, a0),
    # evaluated at sample points (rows of pts).
    theta = spd_inv(p.sigma)
    u = (pts - p.mu) @ theta
    const = -0.5 * float(np.trace(theta @ x.A0))
    return const + u @ x.a0 + 0.5 * np.einsum("ij,ij->i", u @ x.A0, u)


def fisher_numeric(p: GaussianPoint, x: Tangent, y: Tangent, nodes: int = 20) -> float:
    """Quadrature oracle for the Fisher metric.

    Tensor-product Gauss-Hermite estimate of the expected product of the
    score functions along ``x`` and ``y`` under the distribution ``p``.
    Exact for the (polynomial) Gaussian scores once ``nodes`` exceeds the
    degree; restricted to n <= 3 by the tensorized cost.
    """
    n = p.n
    if n > FISHER_QUAD_MAX_DIM:
        raise ValueError(f"quadrature oracle supports n <= {FISHER_QUAD_MAX_DIM}, got n = {n}")
    if x.n != n or y.n != n:
        raise ValueError("tangent dimension does not match the base point")
    z, w = np.polynomial.hermite.hermgauss(nodes)
    grids = np.meshgrid(*([z] * n), indexing="ij")
    zpts = np.stack([g.ravel() for g in grids], axis=-1)
    weights = np.ones(zpts.shape[0])
    wgrids = np.meshgrid(*([w] * n), indexing="ij")
    for g in wgrids:
        weights = weights * g.ravel()
    weights /= np.pi ** (n / 2.0)
    pts = p.mu + np.sqrt(2.0) * zpts @ spd_sqrt(p.sigma).T
    return float(np.sum(weights * _score(p, x, pts) * _score(p, y, pts)))
