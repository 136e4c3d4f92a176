"""LP membership tests for the S, completely-S, Schur-S and Chen-S classes.

Every test normalises the positive test vector to ``>= 1`` and maximises a
slack ``eps <= cap``.  The feasible cones are invariant under positive
scaling, so the optimum is either the cap or a non-positive number and the
threshold ``POS_TOL`` separates the two cleanly.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field

import numpy as np

from . import numerics
from .numerics import LinearProgram, Relation, lp_solve

POS_TOL = 1e-7
VACUOUS_TOL = 1e-10
FALLBACK_CAP = 1e6


def subsets(n: int) -> list[tuple[int, ...]]:
    """Non-empty subsets of ``range(n)`` ordered by size, then lexicographically."""
    return [c for r in range(1, n + 1) for c in itertools.combinations(range(n), r)]


def partitions(n: int) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Partitions ``(a, b)`` of ``range(n)`` with ``a`` non-empty, in the order of :func:`subsets` over ``a``."""
    out = []
    for a in subsets(n):
        b = tuple(i for i in range(n) if i not in a)
        out.append((a, b))
    return out


def _one_based(idx) -> tuple[int, ...]:
    return tuple(i + 1 for i in idx)


@dataclass
class ClassReport:
    holds: bool
    witness: np.ndarray | None = None
    failing_subset: tuple[int, ...] | None = None
    epsilon: float | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.holds


def _cone_lp(G: np.ndarray, cap: float = 1.0) -> tuple[float, np.ndarray | None]:
    """max eps s.t. G x >= eps e, x >= e, eps <= cap.  Returns (eps*, x)."""
    r, n = G.shape
    A = np.hstack([G, -np.ones((r, 1))])
    lp = LinearProgram(
        c=np.r_[np.zeros(n), 1.0],
        A=A,
        b=np.zeros(r),
        relations=[Relation.GE] * r,
        lower=np.r_[np.ones(n), -np.inf],
        upper=np.r_[np.full(n, np.inf), cap],
    )
    out = lp_solve(lp)
    if not out.optimal:  # x = e, eps = min(Ge) is always feasible
        raise numerics.NumericalError(f"cone LP unexpectedly {out.status.value}")
    return out.value, out.x[:n]


def is_s_matrix(A) -> ClassReport:
    """Is there ``u > 0`` with ``A u > 0``?"""
    A = numerics.as_matrix(A, square=True)
    eps, u = _cone_lp(A)
    if eps > POS_TOL:
        return ClassReport(True, witness=u, epsilon=eps)
    return ClassReport(False, failing_subset=_one_based(range(A.shape[0])), epsilon=eps,
                       reason="no positive u with Au > 0")


def is_completely_s(A) -> ClassReport:
    A = numerics.as_matrix(A, square=True)
    for idx in subsets(A.shape[0]):
        rep = is_s_matrix(A[np.ix_(idx, idx)])
        if not rep.holds:
            return ClassReport(False, failing_subset=_one_based(idx), epsilon=rep.epsilon,
                               reason=f"principal submatrix {list(_one_based(idx))} is not an S-matrix")
    full = is_s_matrix(A)
    return ClassReport(True, witness=full.witness, epsilon=full.epsilon)


def schur_complement(A: np.ndarray, a, b) -> np.ndarray:
    Aa = A[np.ix_(a, a)]
    if not b:
        return Aa
    return Aa - A[np.ix_(a, b)] @ numerics.solve(A[np.ix_(b, b)], A[np.ix_(b, a)])


def is_schur_s(A) -> ClassReport:
    A = numerics.as_matrix(A, square=True)
    n = A.shape[0]
    for idx in subsets(n):
        if numerics.lu_factor(A[np.ix_(idx, idx)]).singular:
            return ClassReport(False, failing_subset=_one_based(idx),
                               reason=f"principal submatrix {list(_one_based(idx))} is singular")
    rows = []
    for a, b in partitions(n):
        S = schur_complement(A, list(a), list(b))
        # h_a' S >= eps e'  ->  one row per column of S
        for col in range(len(a)):
            g = np.zeros(n)
            g[list(a)] = S[:, col]
            rows.append(g)
    eps, h = _cone_lp(np.array(rows))
    if eps > POS_TOL:
        return ClassReport(True, witness=h, epsilon=eps)
    return ClassReport(False, epsilon=eps, reason="no positive h makes every Schur complement row positive")


class ChenMethod(str, enum.Enum):
    EXACT = "exact"
    SUFFICIENT_LP = "sufficient_lp"


@dataclass
class ChenReport:
    holds: bool
    method: ChenMethod
    epsilon_star: float
    h_witness: np.ndarray | None = None
    failing_partition: tuple[tuple[int, ...], tuple[int, ...]] | None = None
    conflicting_partitions: list = field(default_factory=list)
    vacuous_partitions: list = field(default_factory=list)
    completely_s: ClassReport | None = None
    inconclusive: bool = False
    reason: str = ""

    def __bool__(self) -> bool:
        return self.holds

    def to_dict(self) -> dict:
        return {
            "holds": self.holds,
            "method": self.method.value,
            "epsilon_star": self.epsilon_star,
            "h": None if self.h_witness is None else self.h_witness.tolist(),
            "failing_partition": None if self.failing_partition is None
            else {"a": list(self.failing_partition[0]), "b": list(self.failing_partition[1])},
            "vacuous_partitions": [{"a": list(a), "b": list(b)} for a, b in self.vacuous_partitions],
            "inconclusive": self.inconclusive,
            "reason": self.reason,
        }


def chen_constraints(R: np.ndarray, theta: np.ndarray):
    """Per-partition gradient ``g`` with the requirement ``h' g < 0``.

    ``g`` is ``theta_a + R_ab u_b`` scattered into a length-J vector, with
    ``u_b = -R_b^-1 theta_b``.  Partitions whose ``u_b`` has a negative
    entry impose nothing and are returned separately.
    """
    n = R.shape[0]
    active, vacuous = [], []
    for a, b in partitions(n):
        a_l, b_l = list(a), list(b)
        g_a = theta[a_l].copy()
        if b_l:
            u = -numerics.solve(R[np.ix_(b_l, b_l)], theta[b_l])
            if np.any(u < -VACUOUS_TOL):
                vacuous.append((a, b))
                continue
            g_a = g_a + R[np.ix_(a_l, b_l)] @ u
        g = np.zeros(n)
        g[a_l] = g_a
        active.append(((a, b), g))
    return active, vacuous


def _all_principal_nonsingular(R: np.ndarray) -> bool:
    n = R.shape[0]
    return all(not numerics.lu_factor(R[np.ix_(s, s)]).singular for s in subsets(n) if len(s) < n)


def is_chen_s(R, theta) -> ChenReport:
    R = numerics.as_matrix(R, square=True)
    theta = np.asarray(theta, dtype=float).ravel()
    n = R.shape[0]
    if theta.size != n:
        raise numerics.DimensionError(f"theta has {theta.size} entries, R is {n}x{n}")
    cs = is_completely_s(R)
    if not cs.holds:
        return ChenReport(False, ChenMethod.EXACT, float("nan"), completely_s=cs,
                          reason="reflection matrix is not completely-S: " + cs.reason)
    if not _all_principal_nonsingular(R):
        return _chen_fallback(R, theta, cs)

    active, vacuous = chen_constraints(R, theta)
    eps, h = _chen_lp([g for _, g in active], n)
    vac1 = [(_one_based(a), _one_based(b)) for a, b in vacuous]
    if eps > POS_TOL:
        return ChenReport(True, ChenMethod.EXACT, eps, h_witness=h, vacuous_partitions=vac1,
                          completely_s=cs)
    conflict = _irreducible_conflict(active, n)
    parts = [(_one_based(a), _one_based(b)) for (a, b), _ in conflict]
    return ChenReport(False, ChenMethod.EXACT, eps, failing_partition=parts[0] if parts else None,
                      conflicting_partitions=parts, vacuous_partitions=vac1, completely_s=cs,
                      reason="no positive h satisfies the partition inequalities "
                      + " + ".join(f"(a={list(a)}, b={list(b)})" for a, b in parts))


def _chen_lp(grads, n: int) -> tuple[float, np.ndarray]:
    """max eps s.t. h' g <= -eps for every g, h >= e, eps <= 1."""
    if not grads:
        return 1.0, np.ones(n)
    G = -np.array(grads)
    return _cone_lp(G)


def _irreducible_conflict(active, n: int):
    """Deletion filter: a minimal subset of partition constraints that is still infeasible."""
    kept = list(active)
    i = 0
    while i < len(kept):
        trial = kept[:i] + kept[i + 1:]
        eps, _ = _chen_lp([g for _, g in trial], n)
        if eps <= POS_TOL:
            kept = trial
        else:
            i += 1
    return kept


def _chen_fallback(R: np.ndarray, theta: np.ndarray, cs: ClassReport) -> ChenReport:
    """Sufficient LP for the case where some principal submatrix is singular.

    Variables: h (J), eps, one free multiplier block per proper non-empty b,
    and one block eta^b >= e per non-empty b.
    """
    n = R.shape[0]
    scale = float(np.max(np.abs(theta)))
    th = theta / scale if scale > 0 else theta
    bsets = subsets(n)
    proper = [b for b in bsets if len(b) < n]
    # variable layout
    off = {"h": 0, "eps": n}
    pos = n + 1
    mult = {}
    for b in proper:
        mult[b] = pos
        pos += len(b)
    eta = {}
    for b in bsets:
        eta[b] = pos
        pos += len(b)
    nv = pos
    rows, rhs, rel = [], [], []

    def row():
        return np.zeros(nv)

    for a, b in partitions(n):
        r = row()
        r[list(a)] = th[list(a)]
        if b:
            r[mult[b]:mult[b] + len(b)] = -th[list(b)]
        r[off["eps"]] = 1.0
        rows.append(r), rhs.append(0.0), rel.append(Relation.LE)
        if b:
            Rab = R[np.ix_(list(a), list(b))]
            Rb = R[np.ix_(list(b), list(b))]
            for col in range(len(b)):
                r = row()
                r[list(a)] = Rab[:, col]
                r[mult[b]:mult[b] + len(b)] = -Rb[:, col]
                rows.append(r), rhs.append(0.0), rel.append(Relation.LE)
    for b in bsets:
        Rb = R[np.ix_(list(b), list(b))]
        for i in range(len(b)):
            r = row()
            r[eta[b]:eta[b] + len(b)] = Rb[i]
            r[off["eps"]] = -1.0
            rows.append(r), rhs.append(0.0), rel.append(Relation.GE)
    lower = np.full(nv, -np.inf)
    upper = np.full(nv, np.inf)
    lower[:n] = 1.0
    upper[n] = FALLBACK_CAP
    for b in bsets:
        lower[eta[b]:eta[b] + len(b)] = 1.0
    c = np.zeros(nv)
    c[n] = 1.0
    out = lp_solve(LinearProgram(c, np.array(rows), np.array(rhs), rel, lower, upper))
    if not out.optimal:
        raise numerics.NumericalError(f"fallback Chen LP unexpectedly {out.status.value}")
    eps = out.value
    if eps > POS_TOL:
        return ChenReport(True, ChenMethod.SUFFICIENT_LP, eps, h_witness=out.x[:n], completely_s=cs)
    return ChenReport(False, ChenMethod.SUFFICIENT_LP, eps, completely_s=cs, inconclusive=True,
                      reason="singular principal submatrix; sufficient LP not positive (inconclusive)")
