"""Dense linear algebra and a two-phase simplex solver.

Everything here works on small, well-scaled float64 arrays.  Matrices are
plain ``numpy.ndarray`` objects; :func:`as_matrix` is the single gatekeeper
that rejects ragged, empty or non-finite input.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

SINGULAR_TOL = 1e-10
FEAS_TOL = 1e-9
_PIVOT_TOL = 1e-9


class DimensionError(ValueError):
    """Operand shapes are incompatible with the requested operation."""


class SingularError(ArithmeticError):
    """A matrix that must be inverted is numerically singular."""


class NumericalError(ArithmeticError):
    """The simplex method failed to terminate or produced an inconsistent point."""


def as_matrix(data, *, square: bool = False) -> np.ndarray:
    a = np.array(data, dtype=float)
    if a.ndim == 1:
        a = a.reshape(1, -1)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise DimensionError(f"expected a non-empty 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    if square and a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    return a


# ---------------------------------------------------------------------------
# LU factorisation


@dataclass(frozen=True)
class LU:
    """Packed LU factors with row permutation ``perm`` (``A[perm] = L @ U``)."""

    lu: np.ndarray
    perm: np.ndarray
    sign: float
    singular: bool


def lu_factor(a, tol: float = SINGULAR_TOL) -> LU:
    """LU with partial pivoting.

    A pivot smaller than ``tol * max|A|`` marks the matrix singular; the
    elimination then skips that column so the factors stay finite.
    """
    a = as_matrix(a, square=True)
    n = a.shape[0]
    lu = a.copy()
    perm = np.arange(n)
    sign = 1.0
    scale = float(np.max(np.abs(a)))
    thresh = tol * scale if scale > 0 else tol
    singular = scale == 0.0
    for k in range(n):
        p = k + int(np.argmax(np.abs(lu[k:, k])))
        if abs(lu[p, k]) <= thresh:
            singular = True
            continue
        if p != k:
            lu[[k, p]] = lu[[p, k]]
            perm[[k, p]] = perm[[p, k]]
            sign = -sign
        lu[k + 1:, k] /= lu[k, k]
        lu[k + 1:, k + 1:] -= np.outer(lu[k + 1:, k], lu[k, k + 1:])
    return LU(lu, perm, sign, singular)


def determinant(a) -> float:
    f = lu_factor(a)
    if f.singular:
        return 0.0
    return float(f.sign * np.prod(np.diag(f.lu)))


def lu_solve(f: LU, b) -> np.ndarray:
    if f.singular:
        raise SingularError("matrix is singular")
    b = np.asarray(b, dtype=float)
    x = b[f.perm].copy()
    n = f.lu.shape[0]
    for i in range(n):
        x[i] -= f.lu[i, :i] @ x[:i]
    for i in range(n - 1, -1, -1):
        x[i] = (x[i] - f.lu[i, i + 1:] @ x[i + 1:]) / f.lu[i, i]
    return x


def solve(a, b) -> np.ndarray:
    return lu_solve(lu_factor(a), b)


def invert(a) -> np.ndarray:
    a = as_matrix(a, square=True)
    f = lu_factor(a)
    if f.singular:
        raise SingularError("matrix is singular (|det| below threshold)")
    return lu_solve(f, np.eye(a.shape[0]))


def _check_index(idx: Sequence[int], n: int, what: str) -> list[int]:
    idx = [int(i) for i in idx]
    if not idx:
        raise IndexError(f"{what} index set is empty")
    if any(i < 0 or i >= n for i in idx):
        raise IndexError(f"{what} index out of range 0..{n - 1}: {idx}")
    if sorted(set(idx)) != idx:
        raise IndexError(f"{what} index set must be sorted and duplicate-free: {idx}")
    return idx


def submatrix(a, rows: Sequence[int], cols: Sequence[int]) -> np.ndarray:
    """Rows and columns of ``a`` selected by 0-based sorted index sets."""
    a = as_matrix(a)
    r = _check_index(rows, a.shape[0], "row")
    c = _check_index(cols, a.shape[1], "column")
    return a[np.ix_(r, c)]


def principal_submatrix(a, index: Sequence[int]) -> np.ndarray:
    a = as_matrix(a, square=True)
    return submatrix(a, index, index)


# ---------------------------------------------------------------------------
# Linear programming


class Relation(str, enum.Enum):
    LE = "<="
    EQ = "="
    GE = ">="


class LPStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass
class LinearProgram:
    """``max c'x`` subject to ``A x (rel) b`` and ``lower <= x <= upper``.

    ``relations`` defaults to all ``<=``; bounds default to ``x >= 0``.
    """

    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    relations: list = field(default=None)
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()
        n = self.c.size
        self.A = np.asarray(self.A, dtype=float).reshape(-1, n) if n else np.zeros((0, 0))
        self.b = np.asarray(self.b, dtype=float).ravel()
        m = self.A.shape[0]
        if self.b.size != m:
            raise DimensionError(f"|b| = {self.b.size} but A has {m} rows")
        if self.relations is None:
            self.relations = [Relation.LE] * m
        self.relations = [Relation(r) for r in self.relations]
        if len(self.relations) != m:
            raise DimensionError("one relation per constraint row is required")
        self.lower = np.zeros(n) if self.lower is None else np.asarray(self.lower, float).ravel()
        self.upper = np.full(n, np.inf) if self.upper is None else np.asarray(self.upper, float).ravel()
        if self.lower.size != n or self.upper.size != n:
            raise DimensionError("bounds must have one entry per variable")
        if np.any(self.lower > self.upper):
            raise ValueError("lower bound exceeds upper bound")
        for arr in (self.c, self.A, self.b):
            if not np.all(np.isfinite(arr)):
                raise ValueError("LP data must be finite")

    @property
    def shape(self) -> tuple[int, int]:
        return self.A.shape


@dataclass
class LPOutcome:
    status: LPStatus
    x: np.ndarray | None = None
    value: float | None = None
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is LPStatus.OPTIMAL


def _pivot(T: np.ndarray, r: int, j: int) -> None:
    T[r] /= T[r, j]
    col = T[:, j].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])
    T[np.abs(T) < 1e-13] = 0.0  # flush round-off so it is never chosen as a pivot


class _Tableau:
    """Dense tableau; the last row holds reduced costs ``c_B B^-1 A - c``."""

    def __init__(self, T: np.ndarray, basis: list[int], cap: int):
        self.T = T
        self.basis = basis
        self.cap = cap
        self.iterations = 0

    def run(self, allowed: int) -> bool:
        """Bland's-rule simplex over the first ``allowed`` columns.

        Returns False if the objective is unbounded.
        """
        T = self.T
        m = T.shape[0] - 1
        while True:
            red = T[-1, :allowed]
            cand = np.nonzero(red < -_PIVOT_TOL)[0]
            if cand.size == 0:
                return True
            j = int(cand[0])
            col = T[:m, j]
            best_r, best_ratio = -1, np.inf
            for i in range(m):
                if col[i] > _PIVOT_TOL:
                    ratio = T[i, -1] / col[i]
                    if ratio < best_ratio - 1e-12 or (
                        abs(ratio - best_ratio) <= 1e-12 and self.basis[i] < self.basis[best_r]
                    ):
                        best_r, best_ratio = i, ratio
            if best_r < 0:
                return False
            _pivot(T, best_r, j)
            self.basis[best_r] = j
            self.iterations += 1
            if self.iterations > self.cap:
                raise NumericalError(f"simplex exceeded {self.cap} pivots")


def lp_solve(p: LinearProgram) -> LPOutcome:
    """Solve ``p`` with the two-phase simplex method (Bland's rule)."""
    m0, n = p.A.shape
    # Substitute variables so every working variable is >= 0.
    # x = shift + M_var @ y
    cols: list[tuple[int, float]] = []  # (orig var, coefficient) per y column
    shift = np.zeros(n)
    extra_rows: list[tuple[int, float]] = []  # (y col, ub) for y <= ub
    for k in range(n):
        lo, hi = p.lower[k], p.upper[k]
        if np.isfinite(lo):
            shift[k] = lo
            cols.append((k, 1.0))
            if np.isfinite(hi):
                extra_rows.append((len(cols) - 1, hi - lo))
        elif np.isfinite(hi):
            shift[k] = hi
            cols.append((k, -1.0))
        else:
            cols.append((k, 1.0))
            cols.append((k, -1.0))
    ny = len(cols)
    Mv = np.zeros((n, ny))
    for jj, (k, s) in enumerate(cols):
        Mv[k, jj] = s

    rows_A = []
    rows_b = []
    rels = []
    for i in range(m0):
        a = p.A[i] @ Mv
        bi = p.b[i] - p.A[i] @ shift
        scale = np.max(np.abs(a)) if a.size else 0.0
        rel = p.relations[i]
        if scale == 0.0:
            ok = (
                (rel is Relation.LE and bi >= -FEAS_TOL)
                or (rel is Relation.GE and bi <= FEAS_TOL)
                or (rel is Relation.EQ and abs(bi) <= FEAS_TOL)
            )
            if not ok:
                return LPOutcome(LPStatus.INFEASIBLE)
            continue
        rows_A.append(a / scale)
        rows_b.append(bi / scale)
        rels.append(rel)
    for jj, ub in extra_rows:
        a = np.zeros(ny)
        a[jj] = 1.0
        rows_A.append(a)
        rows_b.append(ub)
        rels.append(Relation.LE)

    m = len(rows_A)
    A = np.array(rows_A).reshape(m, ny)
    b = np.array(rows_b, dtype=float)
    for i in range(m):
        if b[i] < 0:
            A[i] = -A[i]
            b[i] = -b[i]
            rels[i] = {Relation.LE: Relation.GE, Relation.GE: Relation.LE}.get(rels[i], Relation.EQ)

    n_slack = sum(1 for r in rels if r is not Relation.EQ)
    n_art = sum(1 for r in rels if r is not Relation.LE)
    ncol = ny + n_slack + n_art
    T = np.zeros((m + 1, ncol + 1))
    T[:m, :ny] = A
    T[:m, -1] = b
    basis = [-1] * m
    s = ny
    art = ny + n_slack
    art_rows = []
    for i, r in enumerate(rels):
        if r is Relation.LE:
            T[i, s] = 1.0
            basis[i] = s
            s += 1
        elif r is Relation.GE:
            T[i, s] = -1.0
            s += 1
            T[i, art] = 1.0
            basis[i] = art
            art_rows.append(i)
            art += 1
        else:
            T[i, art] = 1.0
            basis[i] = art
            art_rows.append(i)
            art += 1

    cap = 10_000 * (m + ncol + 1)
    tab = _Tableau(T, basis, cap)
    first_art = ny + n_slack
    if art_rows:
        T[-1, :] = -T[art_rows, :].sum(axis=0)
        T[-1, first_art:ncol] = 0.0
        tab.run(ncol)
        if -T[-1, -1] > FEAS_TOL * max(1.0, float(np.max(b, initial=0.0))):
            return LPOutcome(LPStatus.INFEASIBLE, iterations=tab.iterations)
        # Drive remaining artificials out of the basis; drop redundant rows.
        keep = []
        for i in range(m):
            if tab.basis[i] >= first_art:
                row = T[i, :first_art]
                j = int(np.argmax(np.abs(row))) if row.size else 0
                if row.size and abs(row[j]) > 1e-9:
                    _pivot(T, i, j)
                    tab.basis[i] = j
                    keep.append(i)
            else:
                keep.append(i)
        T = np.vstack([T[keep][:, list(range(first_art)) + [ncol]], np.zeros((1, first_art + 1))])
        tab = _Tableau(T, [tab.basis[i] for i in keep], cap)
        tab.iterations = 0
    else:
        T = T[:, list(range(first_art)) + [ncol]]
        tab = _Tableau(T, basis, cap)
    m = T.shape[0] - 1
    cy = np.zeros(T.shape[1] - 1)
    cy[:ny] = Mv.T @ p.c
    cb = cy[tab.basis]
    T[-1, :-1] = cb @ T[:m, :-1] - cy
    T[-1, -1] = cb @ T[:m, -1]
    if not tab.run(T.shape[1] - 1):
        return LPOutcome(LPStatus.UNBOUNDED, iterations=tab.iterations)

    y = np.zeros(T.shape[1] - 1)
    for i, j in enumerate(tab.basis):
        y[j] = T[i, -1]
    y = np.maximum(y[:ny], 0.0)
    x = shift + Mv @ y
    x = np.clip(x, p.lower, p.upper)
    # round-off grows with the size of the solution, so the check is relative
    if not _satisfies(p, x, 1e-7 * max(1.0, float(np.max(np.abs(x), initial=0.0)))):
        raise NumericalError("simplex returned a point violating the constraints")
    return LPOutcome(LPStatus.OPTIMAL, x, float(p.c @ x), tab.iterations)


def constraint_violation(p: LinearProgram, x) -> float:
    """Largest violation over row relations (rows scaled to unit max-norm) and bounds."""
    x = np.asarray(x, float)
    worst = float(np.max(np.maximum(p.lower - x, 0.0), initial=0.0))
    worst = max(worst, float(np.max(np.maximum(x - p.upper, 0.0), initial=0.0)))
    for i in range(p.A.shape[0]):
        scale = np.max(np.abs(p.A[i])) or 1.0
        lhs = (p.A[i] @ x - p.b[i]) / scale
        rel = p.relations[i]
        if rel is Relation.LE:
            v = max(lhs, 0.0)
        elif rel is Relation.GE:
            v = max(-lhs, 0.0)
        else:
            v = abs(lhs)
        worst = max(worst, float(v))
    return worst


def _satisfies(p: LinearProgram, x, tol: float) -> bool:
    return constraint_violation(p, x) <= tol
