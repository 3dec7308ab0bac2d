"""Shared generators and independent oracles for the test suite."""

import numpy as np

from gaussgeo import GaussianPoint, Tangent, tangent_norm


def random_sym(rng, n, scale=1.0):
    a = rng.standard_normal((n, n))
    return scale * 0.5 * (a + a.T)


def random_spd(rng, n, scale=0.5):
    w, v = np.linalg.eigh(random_sym(rng, n, scale))
    return (v * np.exp(w)) @ v.T


def random_tangent(rng, n, norm=1.0):
    xi = Tangent(random_sym(rng, n), rng.standard_normal(n))
    return xi.scaled(norm / tangent_norm(xi))


def random_point(rng, n, spread=0.5):
    return GaussianPoint(random_spd(rng, n, spread), spread * rng.standard_normal(n))


def scalar_ldl(g):
    """Unblocked LDL^T by plain Gaussian elimination (oracle, no pivoting)."""
    g = np.array(g, dtype=float)
    size = g.shape[0]
    lower = np.eye(size)
    diag = np.zeros(size)
    for i in range(size):
        diag[i] = g[i, i] - np.sum(lower[i, :i] ** 2 * diag[:i])
        for j in range(i + 1, size):
            lower[j, i] = (g[j, i] - np.sum(lower[j, :i] * lower[i, :i] * diag[:i])) / diag[i]
    return lower, diag


def blocked_from_scalar(g, n):
    """Group the scalar LDL^T into the (n,1,n) block normalization."""
    lower, diag = scalar_ldl(g)
    b = np.zeros_like(lower)
    b[:n, :n] = lower[:n, :n]
    b[n, n] = lower[n, n]
    b[n + 1:, n + 1:] = lower[n + 1:, n + 1:]
    m = lower @ np.linalg.inv(b)
    d = b @ np.diag(diag) @ b.T
    return m, d


def expm_taylor(a, order=18, squarings=12):
    """General matrix exponential by scaled Taylor series (oracle-grade)."""
    a = np.array(a, dtype=float) / 2.0 ** squarings
    size = a.shape[0]
    out = np.eye(size)
    term = np.eye(size)
    for k in range(1, order + 1):
        term = term @ a / k
        out = out + term
    for _ in range(squarings):
        out = out @ out
    return out


def rk4(f, y0, t_end, steps):
    """Classical fixed-step Runge-Kutta (oracle-grade integrator)."""
    y = np.array(y0, dtype=float)
    t = 0.0
    dt = t_end / steps
    for _ in range(steps):
        k1 = f(t, y)
        k2 = f(t + dt / 2, y + dt / 2 * k1)
        k3 = f(t + dt / 2, y + dt / 2 * k2)
        k4 = f(t + dt, y + dt * k3)
        y = y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += dt
    return y


def integrate_geodesic_ode(A0, a0, t_end, steps=4000):
    """Independent oracle: integrate the second-order geodesic equations.

    State (sigma, sigma_dot, mu, mu_dot) from (id, A0, 0, a0), with
    sigma_ddot = sigma_dot sigma^{-1} sigma_dot - mu_dot mu_dot^T and
    mu_ddot = sigma_dot sigma^{-1} mu_dot.
    """
    n = len(a0)

    def pack(s, sd, m, md):
        return np.concatenate([s.ravel(), sd.ravel(), m, md])

    def unpack(y):
        k = n * n
        return (y[:k].reshape(n, n), y[k:2 * k].reshape(n, n), y[2 * k:2 * k + n], y[2 * k + n:])

    def f(_t, y):
        s, sd, _m, md = unpack(y)
        sinv_sd = np.linalg.solve(s, sd)
        sdd = sd @ sinv_sd - np.outer(md, md)
        mdd = sd @ np.linalg.solve(s, md)
        return pack(sd, sdd, md, mdd)

    y = rk4(f, pack(np.eye(n), np.array(A0, dtype=float), np.zeros(n), np.array(a0, dtype=float)), t_end, steps)
    s, _sd, m, _md = unpack(y)
    return s, m
