"""Reflection matrix and drift of the collapsed workload process."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numerics
from .network import NetworkPrimitives, derive
from .ratio import are_neighbors, convex_combine

DET_ZERO_TOL = 1e-10


class NotNeighborsError(ValueError):
    pass


@dataclass(frozen=True)
class ReflectionData:
    Rinv: np.ndarray
    det_Rinv: float
    invertible: bool
    R: np.ndarray | None = None
    theta: np.ndarray | None = None

    @property
    def det_R(self) -> float | None:
        return 1.0 / self.det_Rinv if self.invertible else None

    @property
    def det_sign(self) -> int:
        return det_sign(self.det_Rinv)


def det_sign(value: float, tol: float = DET_ZERO_TOL) -> int:
    """Sign with a dead zone: magnitudes below ``tol`` count as zero."""
    if value is None or abs(value) < tol:
        return 0
    return 1 if value > 0 else -1


def workload_map(net: NetworkPrimitives, delta) -> np.ndarray:
    """``C M Q Delta``, the inverse of the reflection matrix."""
    q = derive(net).Q
    d = np.asarray(delta, float)
    cm = net.C * net.mean_service
    return cm @ q @ (net.C.T * d[:, None])


def reflection(net: NetworkPrimitives, delta) -> ReflectionData:
    rinv = workload_map(net, delta)
    f = numerics.lu_factor(rinv)
    det = 0.0 if f.singular else float(f.sign * np.prod(np.diag(f.lu)))
    if f.singular or abs(det) < DET_ZERO_TOL:
        return ReflectionData(rinv, det, False)
    r = numerics.lu_solve(f, np.eye(rinv.shape[0]))
    theta = r @ (derive(net).rho - 1.0)
    return ReflectionData(rinv, det, True, r, theta)


@dataclass(frozen=True)
class Combination:
    beta: float
    R: np.ndarray


def combination_coefficient(net: NetworkPrimitives, delta1, delta2, lam: float) -> Combination:
    """Weight ``beta`` with ``R(lam d1 + (1-lam) d2) = beta R(d1) + (1-beta) R(d2)``.

    Only valid for neighbouring ratio matrices.  Raises ``SingularError``
    when an endpoint or the interior point has no reflection matrix.
    """
    if not are_neighbors(net, delta1, delta2):
        raise NotNeighborsError("ratio matrices differ in more than one station")
    r1, r2 = reflection(net, delta1), reflection(net, delta2)
    if not (r1.invertible and r2.invertible):
        raise numerics.SingularError("endpoint reflection matrix is not invertible")
    r3 = reflection(net, convex_combine(delta1, delta2, lam))
    if not r3.invertible:
        raise numerics.SingularError("interior point CMQ Delta is singular")
    num = lam * r2.det_R
    den = num + (1.0 - lam) * r1.det_R
    if abs(den) < DET_ZERO_TOL * max(abs(num), 1.0):
        raise numerics.SingularError("determinant weights cancel; no affine combination")
    beta = num / den
    return Combination(beta, beta * r1.R + (1.0 - beta) * r2.R)
