"""Isospectral (Toda-type) Lax flow attached to the lifted geodesics.

Factoring the lifted geodesic ``G(t) = exp(t V)`` into its block
lower/upper parts ``G = G1 G2`` and conjugating the generator,
``L(t) = G1(t)^{-1} V G1(t)``, produces a curve in the split orthogonal
algebra of the sparse form

    L = [ -Q    r    0  ]       M = [ -Q    0    0  ]
        [ a0^T  0  -r^T ]           [ a0^T  0    0  ]
        [  0   -a0  Q^T ]           [  0   -a0  Q^T ]

with ``M`` the block lower-triangular projection of ``L``.  The curve
solves the Lax equation ``L_dot = [L, M]``, equivalently the explicit
systems

    Q_dot = -r a0^T,  r_dot = Q r          (bilinear form)
    2 Q_dot = Q^2 - A0^2 - 2 a0 a0^T,  r_dot = Q r   (Riccati form)

from ``Q(0) = A0``, ``r(0) = a0``; conversely every solution with that
initial value is the conjugated curve above.  The flow preserves the
spectrum of ``L``, monitored here through traces of powers (similarity
invariants that need no nonsymmetric eigensolver).  For scalar data with
``A0 = 0`` the Riccati form integrates to
``Q(t) = -sqrt(2) a tanh(a t / sqrt(2))``, the classic saturating front of
the open Toda chain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .matcore import block_cholesky, sym_exp
from .manifold import Tangent
from .sympair import horizontal_lift

DEFAULT_DT = 1e-3
CONSISTENCY_TOL = 1e-10


@dataclass(frozen=True)
class LaxState:
    """Evolving data of the flow: a general square block and a vector."""

    Q: np.ndarray
    r: np.ndarray

    @property
    def n(self) -> int:
        return self.Q.shape[0]


@dataclass(frozen=True)
class LaxMatrices:
    """Assembled Lax pair."""

    L: np.ndarray
    M: np.ndarray


def build_L(state: LaxState, a0: np.ndarray) -> np.ndarray:
    n = state.n
    l = np.zeros((2 * n + 1, 2 * n + 1))
    l[:n, :n] = -state.Q
    l[:n, n] = state.r
    l[n, :n] = a0
    l[n, n + 1:] = -state.r
    l[n + 1:, n] = -a0
    l[n + 1:, n + 1:] = state.Q.T
    return l


def build_M(state: LaxState, a0: np.ndarray) -> np.ndarray:
    n = state.n
    m = np.zeros((2 * n + 1, 2 * n + 1))
    m[:n, :n] = -state.Q
    m[n, :n] = a0
    m[n + 1:, n] = -a0
    m[n + 1:, n + 1:] = state.Q.T
    return m


def lax_matrices(state: LaxState, a0: np.ndarray) -> LaxMatrices:
    return LaxMatrices(L=build_L(state, a0), M=build_M(state, a0))


def state_from_L(l: np.ndarray) -> LaxState:
    n = (l.shape[0] - 1) // 2
    return LaxState(Q=-l[:n, :n].copy(), r=l[:n, n].copy())


def rhs_bilinear(state: LaxState, a0: np.ndarray) -> LaxState:
    """Right side of the bilinear form: (-r a0^T, Q r)."""
    return LaxState(Q=-np.outer(state.r, a0), r=state.Q @ state.r)


def rhs_riccati(state: LaxState, A0: np.ndarray, a0: np.ndarray) -> LaxState:
    """Right side of the Riccati form: ((Q^2 - A0^2 - 2 a0 a0^T)/2, Q r)."""
    return LaxState(
        Q=0.5 * (state.Q @ state.Q - A0 @ A0 - 2.0 * np.outer(a0, a0)),
        r=state.Q @ state.r,
    )


def _rk4_step(f, y: np.ndarray, dt: float) -> np.ndarray:
    k1 = f(y)
    k2 = f(y + 0.5 * dt * k1)
    k3 = f(y + 0.5 * dt * k2)
    k4 = f(y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate(rhs: str, xi: Tangent, t_end: float, dt: float = DEFAULT_DT) -> list[tuple[float, LaxState]]:
    """Fixed-step classical Runge-Kutta integration of the flow.

    ``rhs`` selects the explicit system (``"bilinear"`` or ``"riccati"``);
    the initial state is ``(A0, a0)`` from the tangent.  The last sample
    lands on ``t_end`` exactly (a final partial step is allowed).

    Raises
    ------
    ArithmeticError
        If the state stops being finite (step size too large for the
        front's stiffness); the message reports the offending time.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if t_end < 0:
        raise ValueError("t_end must be nonnegative")
    n = xi.n
    a0 = xi.a0.copy()
    A0 = xi.A0.copy()

    if rhs == "bilinear":
        def f(y: np.ndarray) -> np.ndarray:
            d = rhs_bilinear(_unpack_state(y, n), a0)
            return _pack_state(d)
    elif rhs == "riccati":
        def f(y: np.ndarray) -> np.ndarray:
            d = rhs_riccati(_unpack_state(y, n), A0, a0)
            return _pack_state(d)
    else:
        raise ValueError(f"unknown right side {rhs!r}; expected 'bilinear' or 'riccati'")

    y = _pack_state(LaxState(Q=A0.copy(), r=a0.copy()))
    t = 0.0
    samples = [(0.0, _unpack_state(y, n))]
    # overflow is handled by the finiteness check below, not by numpy warnings
    with np.errstate(over="ignore", invalid="ignore"):
        while t < t_end - 1e-12 * max(1.0, t_end):
            step = min(dt, t_end - t)
            y = _rk4_step(f, y, step)
            t = min(t + step, t_end)
            if not np.all(np.isfinite(y)):
                raise ArithmeticError(f"flow stopped being finite at t = {t:.6g}; reduce dt")
            samples.append((t, _unpack_state(y, n)))
    return samples


def _pack_state(s: LaxState) -> np.ndarray:
    return np.concatenate([s.Q.ravel(), s.r])


def _unpack_state(y: np.ndarray, n: int) -> LaxState:
    return LaxState(Q=y[: n * n].reshape(n, n).copy(), r=y[n * n:].copy())


def lax_pattern_residual(l: np.ndarray, a0: np.ndarray) -> float:
    """Deviation of a matrix from the sparse Lax form with constant borders."""
    n = (l.shape[0] - 1) // 2
    parts = [
        np.linalg.norm(l[:n, n + 1:]),            # upper-right block vanishes
        np.linalg.norm(l[n + 1:, :n]),            # lower-left block vanishes
        abs(float(l[n, n])),                      # center entry vanishes
        np.linalg.norm(l[n, :n] - a0),            # constant border row
        np.linalg.norm(l[n + 1:, n] + a0),        # constant border column
        np.linalg.norm(l[n, n + 1:] + l[:n, n]),  # the two r-borders match
        np.linalg.norm(l[n + 1:, n + 1:] + l[:n, :n].T),  # trailing block is Q^T
    ]
    return float(max(parts))


def lax_closed_form(xi: Tangent, t: float) -> np.ndarray:
    """Conjugated-generator solution of the Lax equation at time ``t``.

    Factors ``exp(t V) = G1 G2`` through the block LDL^T, conjugates the
    generator by ``G1^{-1}``, cross-checks against the (equivalent)
    conjugation by ``G2``, and validates the sparse form.
    """
    v = horizontal_lift(xi).matrix()
    g = sym_exp(t * v)
    m, d = block_cholesky(g)
    g1 = m.assemble() @ d.assemble()
    l = np.linalg.solve(g1, v @ g1)
    g2 = m.assemble().T
    l_alt = g2 @ v @ np.linalg.inv(g2)
    scale = max(1.0, float(np.linalg.norm(l)))
    if np.linalg.norm(l - l_alt) > CONSISTENCY_TOL * scale:
        raise ArithmeticError("the two conjugation routes disagree; factorization is inconsistent")
    if lax_pattern_residual(l, xi.a0) > CONSISTENCY_TOL * scale:
        raise ArithmeticError("conjugated generator lost the sparse Lax form")
    return l


def verify_lax(samples: list[tuple[float, LaxState]], a0: np.ndarray, h: float) -> tuple[float, float]:
    """Commutator residual and spectral drift of an integrated flow.

    Central finite differences (step ``h``, a multiple of the sampling
    spacing) approximate ``L_dot``, compared against ``L M - M L``; the
    spectral drift is the worst deviation of ``trace(L^k)`` from its initial
    value for k up to the matrix order.
    """
    if len(samples) < 3:
        raise ValueError("need at least three samples")
    ts = np.array([t for t, _ in samples])
    deltas = np.diff(ts)
    spacing = float(deltas[0])
    if spacing <= 0 or np.max(np.abs(deltas - spacing)) > 1e-9 * max(spacing, 1e-30):
        raise ValueError("samples must lie on a uniform increasing grid")
    m = int(round(h / spacing))
    if m < 1:
        raise ValueError(f"grid too coarse relative to h: spacing {spacing:.3e} exceeds step {h:.3e}")
    if abs(m * spacing - h) > 1e-9 * h:
        raise ValueError(f"step {h:.3e} is not a multiple of the sampling spacing {spacing:.3e}")
    if ts.size < 2 * m + 1:
        raise ValueError("sampled range too short for the requested finite-difference step")

    ls = np.stack([build_L(s, a0) for _, s in samples])
    ms = np.stack([build_M(s, a0) for _, s in samples])

    ldot = (ls[2 * m:] - ls[:-2 * m]) / (2.0 * h)
    center_l = ls[m:-m]
    center_m = ms[m:-m]
    bracket = center_l @ center_m - center_m @ center_l
    comm_residual = float(np.max(np.linalg.norm(ldot - bracket, axis=(1, 2))))

    order = ls.shape[1]
    powers = ls.copy()
    traces = [np.trace(powers, axis1=1, axis2=2)]
    for _ in range(order - 1):
        powers = powers @ ls
        traces.append(np.trace(powers, axis1=1, axis2=2))
    traces = np.stack(traces)  # (order, samples)
    drift = float(np.max(np.abs(traces - traces[:, :1])))
    return comm_residual, drift


def lax_header(n: int) -> list[str]:
    cols = ["t"]
    cols += [f"Q_{i + 1}{j + 1}" for i in range(n) for j in range(n)]
    cols += [f"r_{i + 1}" for i in range(n)]
    return cols


def write_lax_csv(samples: list[tuple[float, LaxState]], fh) -> None:
    """Write flow samples as CSV: t, row-major Q entries, r entries."""
    import csv

    n = samples[0][1].n
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(lax_header(n))
    for t, state in samples:
        row = [f"{t:.17g}"]
        row += [f"{v:.17g}" for v in state.Q.ravel()]
        row += [f"{v:.17g}" for v in state.r]
        writer.writerow(row)
