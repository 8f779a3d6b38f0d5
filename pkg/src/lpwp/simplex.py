"""Dense two-phase tableau simplex with Bland's rule, plus a brute-force oracle."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import IterationLimitError, LpwpError
from .ir import Direction, Relation
from .lp import LpModel

# pivot/reduced-cost threshold; coefficients in word problems are O(1..1e4)
_EPS = 1e-10


class SolveStatus(str, Enum):
    OPTIMAL = "OPTIMAL"
    INFEASIBLE = "INFEASIBLE"
    UNBOUNDED = "UNBOUNDED"


@dataclass
class Solution:
    status: SolveStatus
    x: np.ndarray | None
    objective: float | None
    iterations: int
    var_names: tuple[str, ...] = ()

    def to_record(self) -> dict[str, object]:
        values = None
        if self.x is not None:
            values = {n: float(v) + 0.0 for n, v in zip(self.var_names, self.x)}
        return {
            "status": self.status.value,
            "objective": None if self.objective is None else float(self.objective) + 0.0,
            "values": values,
            "iterations": self.iterations,
        }


class _Tableau:
    """Rows ``T[:m]`` hold ``[A | b]``; the last row holds reduced costs and ``-z``."""

    def __init__(self, T: np.ndarray, basis: list[int], max_iter: int):
        self.T = T
        self.basis = basis
        self.iterations = 0
        self.max_iter = max_iter

    @property
    def m(self) -> int:
        return self.T.shape[0] - 1

    def pivot(self, r: int, k: int) -> None:
        T = self.T
        T[r] /= T[r, k]
        col = T[:, k].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r])
        self.basis[r] = k
        self.iterations += 1

    def run(self, allowed: int) -> bool:
        """Minimize the cost row over columns ``< allowed``; False if unbounded."""
        T = self.T
        while True:
            costs = T[-1, :allowed]
            entering = np.flatnonzero(costs < -_EPS)
            if entering.size == 0:
                return True
            k = int(entering[0])  # Bland: lowest index
            col = T[: self.m, k]
            rows = np.flatnonzero(col > _EPS)
            if rows.size == 0:
                return False
            ratios = T[rows, -1] / col[rows]
            best = ratios.min()
            ties = rows[ratios <= best + _EPS * max(1.0, abs(best))]
            r = int(min(ties, key=lambda i: self.basis[i]))  # Bland: lowest basic index
            if self.iterations >= self.max_iter:
                raise IterationLimitError(self.iterations)
            self.pivot(r, k)


def solve_simplex(m: LpModel, feas_tol: float = 1e-9, max_iter: int | None = None) -> Solution:
    """Two-phase simplex.

    Phase 1 minimizes the sum of artificial variables and reports
    INFEASIBLE if that optimum exceeds ``feas_tol``; phase 2 optimizes the
    model objective. Maximization negates ``c`` internally. Lower bounds
    are shifted away; free variables are split into two non-negative parts.

    Raises:
        IterationLimitError: more than ``max_iter`` pivots (default
            ``10 * (rows + cols) ** 2``).
    """
    n_rows, n_cols = m.A.shape
    if max_iter is None:
        max_iter = 10 * max(n_rows + n_cols, 1) ** 2

    # column transform: x = shift + P @ y with y >= 0
    free = m.lower_bounds == -math.inf
    shift = np.where(free, 0.0, m.lower_bounds)
    P = np.zeros((n_cols, n_cols + int(free.sum())))
    extra = n_cols
    for j in range(n_cols):
        P[j, j] = 1.0
        if free[j]:
            P[j, extra] = -1.0
            extra += 1
    A = m.A @ P
    b = m.b - m.A @ shift
    cost = m.c @ P
    if m.sense is Direction.MAXIMIZE:
        cost = -cost
    ny = A.shape[1]

    # slack columns for LE rows, then flip rows with negative rhs
    le_rows = [i for i, r in enumerate(m.rel) if r is Relation.LE]
    S = np.zeros((n_rows, len(le_rows)))
    for k, i in enumerate(le_rows):
        S[i, k] = 1.0
    A = np.hstack([A, S])
    neg = b < 0
    A[neg] *= -1
    b = np.where(neg, -b, b)
    n_struct = A.shape[1]

    # slack columns that still have +1 can start in the basis; other rows get artificials
    basis = [-1] * n_rows
    for k, i in enumerate(le_rows):
        if not neg[i]:
            basis[i] = ny + k
    art_rows = [i for i in range(n_rows) if basis[i] < 0]
    n_art = len(art_rows)
    T = np.zeros((n_rows + 1, n_struct + n_art + 1))
    T[:n_rows, :n_struct] = A
    T[:n_rows, -1] = b
    for k, i in enumerate(art_rows):
        T[i, n_struct + k] = 1.0
        basis[i] = n_struct + k

    tab = _Tableau(T, basis, max_iter)

    if n_art:
        T[-1, :] = 0.0
        T[-1, n_struct:n_struct + n_art] = 1.0
        for i in art_rows:
            T[-1] -= T[i]
        tab.run(n_struct + n_art)
        if -T[-1, -1] > feas_tol:
            return Solution(SolveStatus.INFEASIBLE, None, None, tab.iterations, m.var_names)
        # push zero-level artificials out of the basis; drop redundant rows
        keep = []
        for r in range(n_rows):
            if tab.basis[r] >= n_struct:
                nz = np.flatnonzero(np.abs(T[r, :n_struct]) > _EPS)
                if nz.size == 0:
                    continue
                tab.pivot(r, int(nz[0]))
            keep.append(r)
        T = np.vstack([T[keep], T[-1:]])
        T = np.delete(T, np.s_[n_struct:n_struct + n_art], axis=1)
        phase1 = tab
        tab = _Tableau(T, [phase1.basis[r] for r in keep], max_iter)
        tab.iterations = phase1.iterations

    T = tab.T
    T[-1, :] = 0.0
    T[-1, :ny] = cost
    for r, k in enumerate(tab.basis):
        if T[-1, k] != 0:
            T[-1] -= T[-1, k] * T[r]
    bounded = tab.run(n_struct)
    iterations = tab.iterations
    if not bounded:
        return Solution(SolveStatus.UNBOUNDED, None, None, iterations, m.var_names)

    z = np.zeros(T.shape[1] - 1)
    for r, k in enumerate(tab.basis):
        z[k] = T[r, -1]
    x = shift + P @ z[:ny]
    return Solution(SolveStatus.OPTIMAL, x, float(m.c @ x), iterations, m.var_names)


# ---------------------------------------------------------------------------
# brute-force oracle

MAX_ORACLE_COLS = 6
MAX_ORACLE_ROWS = 12


def _check_oracle_size(m: LpModel) -> None:
    rows, cols = m.A.shape
    if cols > MAX_ORACLE_COLS or rows > MAX_ORACLE_ROWS:
        raise LpwpError(
            f"vertex enumeration limited to {MAX_ORACLE_COLS} columns and "
            f"{MAX_ORACLE_ROWS} rows, got {cols}x{rows}"
        )
    if np.any(np.isinf(m.lower_bounds)):
        raise LpwpError("vertex enumeration needs finite lower bounds")


def _vertices(G: np.ndarray, h: np.ndarray, eq: np.ndarray, tol: float) -> list[np.ndarray]:
    """Points where n linearly independent rows of ``G x <= h`` are tight."""
    n = G.shape[1]
    idx = np.array(list(itertools.combinations(range(G.shape[0]), n)), dtype=int).reshape(-1, n)
    if idx.size == 0:
        return []
    M = G[idx]
    regular = np.abs(np.linalg.det(M)) > 1e-9
    if not regular.any():
        return []
    X = np.linalg.solve(M[regular], h[idx[regular]][..., None])[..., 0]
    resid = X @ G.T - h
    ok = np.all(resid <= tol, axis=1) & np.all(np.abs(resid[:, eq]) <= tol, axis=1)
    found: list[np.ndarray] = []
    for x in X[ok]:
        if not any(np.allclose(x, y, atol=tol, rtol=0) for y in found):
            found.append(x + 0.0)
    return found


def _stacked_rows(m: LpModel) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    n = m.A.shape[1]
    G = np.vstack([m.A, -np.eye(n)])
    h = np.concatenate([m.b, -m.lower_bounds])
    eq = np.array([r is Relation.EQ for r in m.rel] + [False] * n, dtype=bool)
    return G, h, eq


def enumerate_vertices(m: LpModel, tol: float = 1e-9) -> list[tuple[np.ndarray, float]]:
    """All basic feasible points of ``m`` with their objective values.

    Every n-subset of constraint and bound rows is solved as an equality
    system and kept when the point satisfies all rows. Exponential; guarded
    to at most 6 columns and 12 rows.
    """
    _check_oracle_size(m)
    G, h, eq = _stacked_rows(m)
    return [(x, float(m.c @ x)) for x in _vertices(G, h, eq, tol)]


def oracle_status(m: LpModel, tol: float = 1e-9) -> tuple[SolveStatus, float | None]:
    """Classify ``m`` by enumeration alone.

    No vertex means infeasible (the feasible set lies in a shifted orthant,
    so it is pointed). Otherwise the LP is unbounded iff some recession
    direction ``d >= 0`` with ``A d <= 0`` (``= 0`` on EQ rows) and
    ``sum(d) = 1`` improves the objective; that normalized cone is a
    polytope, so its vertices are enumerated as well.
    """
    verts = enumerate_vertices(m, tol)
    if not verts:
        return SolveStatus.INFEASIBLE, None
    sign = 1.0 if m.sense is Direction.MAXIMIZE else -1.0
    n = m.A.shape[1]
    G_rec = np.vstack([m.A, -np.eye(n), np.ones((1, n)), -np.ones((1, n))])
    h_rec = np.concatenate([np.zeros(m.A.shape[0] + n), [1.0, -1.0]])
    eq = np.array([r is Relation.EQ for r in m.rel] + [False] * n + [True, True], dtype=bool)
    for d in _vertices(G_rec, h_rec, eq, tol):
        if sign * (m.c @ d) > 1e-9:
            return SolveStatus.UNBOUNDED, None
    best = max(sign * v for _, v in verts)
    return SolveStatus.OPTIMAL, sign * best
