"""Time-stepped solutions of the linear Skorohod problem ``W = W0 + theta t + R Y``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import numerics
from ..matrix_classes import subsets


class NoReflectionError(ArithmeticError):
    """No complementary pushing rate exists for this step."""


@dataclass(frozen=True)
class SkorohodProblem:
    R: np.ndarray
    theta: np.ndarray
    W0: np.ndarray

    def __post_init__(self):
        R = numerics.as_matrix(self.R, square=True)
        theta = np.asarray(self.theta, float).ravel()
        W0 = np.asarray(self.W0, float).ravel()
        if theta.size != R.shape[0] or W0.size != R.shape[0]:
            raise numerics.DimensionError("R, theta and W0 sizes disagree")
        if np.any(W0 < 0):
            raise ValueError("W0 must be nonnegative")
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "W0", W0)


@dataclass
class SkorohodTrajectory:
    times: np.ndarray
    W: np.ndarray
    Y: np.ndarray
    y: np.ndarray  # pushing rate used on each step (last row zero)

    def hitting_time(self, tol: float = 1e-12) -> float | None:
        """First time every component is at zero."""
        hit = np.nonzero(np.all(self.W <= tol, axis=1))[0]
        return float(self.times[hit[0]]) if hit.size else None


STEP_TOL = 1e-12


def _support_factors(R: np.ndarray) -> list[tuple[list[int], numerics.LU]]:
    """LU factors of every nonsingular principal submatrix, in trial order."""
    out = []
    for s in subsets(R.shape[0]):
        idx = list(s)
        f = numerics.lu_factor(R[np.ix_(idx, idx)])
        if not f.singular:
            out.append((idx, f))
    return out


def _push(W: np.ndarray, R: np.ndarray, theta: np.ndarray, dt: float, factors=None) -> np.ndarray:
    """Rate ``y >= 0`` with ``W + dt (theta + R y) >= 0`` and complementarity.

    This is a small LCP; it is solved by trying support sets by size, then
    lexicographically, and taking the first complementary one.
    """
    q = W + dt * theta
    n = W.size
    if np.all(q >= -STEP_TOL):
        return np.zeros(n)
    for idx, f in (factors if factors is not None else _support_factors(R)):
        ys = numerics.lu_solve(f, -q[idx] / dt)
        if np.any(ys < -STEP_TOL):
            continue
        y = np.zeros(n)
        y[idx] = np.maximum(ys, 0.0)
        if np.all(q + dt * (R @ y) >= -STEP_TOL * max(1.0, np.abs(q).max())):
            return y
    raise NoReflectionError(f"no complementary reflection from W = {W.tolist()}")


def simulate_skorohod(sp: SkorohodProblem, dt: float, T: float) -> SkorohodTrajectory:
    if dt <= 0 or T <= 0:
        raise ValueError("dt and T must be positive")
    steps = int(round(T / dt))
    n = sp.W0.size
    W = sp.W0.copy()
    Y = np.zeros(n)
    factors = _support_factors(sp.R)
    times, Ws, Ys, ys = [0.0], [W.copy()], [Y.copy()], []
    for k in range(1, steps + 1):
        y = _push(W, sp.R, sp.theta, dt, factors)
        W = np.maximum(W + dt * (sp.theta + sp.R @ y), 0.0)
        Y = Y + dt * y
        times.append(k * dt)
        Ws.append(W.copy())
        Ys.append(Y.copy())
        ys.append(y)
    ys.append(np.zeros(n))
    return SkorohodTrajectory(np.array(times), np.array(Ws), np.array(Ys), np.array(ys))
